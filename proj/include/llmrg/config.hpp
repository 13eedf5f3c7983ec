// Run configuration shared by graph construction, training and evaluation.
// Precedence: CLI flag > config file > built-in default.

#pragma once

#include <cstdint>
#include <string>

namespace llmrg {

struct PipelineConfig {
    // Reasoning
    int tau = 30;              // verification threshold, 0..100 inclusive
    std::size_t l_tru = 50;    // sequence truncation length
    int chains_per_item = 3;
    int divergent_k = 3;       // candidate continuations per chain
    double theta_sim = 0.35;   // grounding similarity threshold
    std::size_t cache_capacity = 100000;

    // Encoders / recommender
    int d_g = 64;              // graph embedding dimension
    int d_b = 64;              // base model (and fusion output) dimension
    int propagation_steps = 2; // gated-graph propagation steps T

    // Training
    double learning_rate = 0.05;
    int epochs = 5;
    std::uint64_t seed = 1;

    // Mock oracle fidelity (mock backend only)
    double mock_fidelity = 1.0;
};

// Loads fields present in a JSON config file over the defaults; unknown keys
// are rejected so typos surface early.
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});

void validate(const PipelineConfig& config);

}  // namespace llmrg
