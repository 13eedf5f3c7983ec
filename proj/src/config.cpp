#include "llmrg/config.hpp"

#include <stdexcept>

#include "llmrg/serialize.hpp"

namespace llmrg {

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
    auto j = read_json_file(path);
    for (const auto& [key, value] : j.items()) {
        if (key == "tau") base.tau = value.get<int>();
        else if (key == "l_tru") base.l_tru = value.get<std::size_t>();
        else if (key == "chains_per_item") base.chains_per_item = value.get<int>();
        else if (key == "divergent_k") base.divergent_k = value.get<int>();
        else if (key == "theta_sim") base.theta_sim = value.get<double>();
        else if (key == "cache_capacity") base.cache_capacity = value.get<std::size_t>();
        else if (key == "d_g") base.d_g = value.get<int>();
        else if (key == "d_b") base.d_b = value.get<int>();
        else if (key == "propagation_steps") base.propagation_steps = value.get<int>();
        else if (key == "learning_rate") base.learning_rate = value.get<double>();
        else if (key == "epochs") base.epochs = value.get<int>();
        else if (key == "seed") base.seed = value.get<std::uint64_t>();
        else if (key == "mock_fidelity") base.mock_fidelity = value.get<double>();
        else throw std::invalid_argument("unknown config key: " + key);
    }
    validate(base);
    return base;
}

void validate(const PipelineConfig& config) {
    if (config.tau < 0 || config.tau > 100) {
        throw std::invalid_argument("tau must lie in 0..100");
    }
    if (config.l_tru == 0) throw std::invalid_argument("l_tru must be positive");
    if (config.chains_per_item < 1) throw std::invalid_argument("chains_per_item must be >= 1");
    if (config.divergent_k < 1) throw std::invalid_argument("divergent_k must be >= 1");
    if (config.theta_sim < 0.0 || config.theta_sim > 1.0) {
        throw std::invalid_argument("theta_sim must lie in [0,1]");
    }
    if (config.cache_capacity == 0) throw std::invalid_argument("cache_capacity must be >= 1");
    if (config.d_g < 1 || config.d_b < 1) throw std::invalid_argument("dimensions must be >= 1");
    if (config.propagation_steps < 1) {
        throw std::invalid_argument("propagation_steps must be >= 1");
    }
    if (config.learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (config.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (config.mock_fidelity < 0.0 || config.mock_fidelity > 1.0) {
        throw std::invalid_argument("mock_fidelity must lie in [0,1]");
    }
}

}  // namespace llmrg
