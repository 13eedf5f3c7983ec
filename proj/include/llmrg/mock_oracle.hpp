// Offline deterministic stand-in for the language model. Answers every task
// from a fixed knowledge table; per-request randomness is derived from
// (seed, request content), so identical requests always get identical
// responses regardless of call order or concurrency.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "llmrg/llm.hpp"

namespace llmrg {

// Per-attribute related concepts and item titles. Concepts and items are
// paired by index: item i is motivated by concept i % |concepts|. That pairing
// is what makes abductive fill-ins reconstructible without seeing the
// original chain.
struct KnowledgeEntry {
    std::vector<std::string> concepts;
    std::vector<std::string> items;  // canonical item titles
};

using KnowledgeTable = std::map<std::string, KnowledgeEntry>;

struct MockOracleConfig {
    KnowledgeTable table;
    double fidelity = 1.0;  // probability an abductive fill matches the masked original
    std::uint64_t seed = 0;
};

class MockBackend : public Backend {
public:
    explicit MockBackend(MockOracleConfig config);

    std::string complete(const Prompt& prompt) override;

private:
    std::string answer_chain_reasoning(const std::string& payload) const;
    std::string answer_divergent_extension(const std::string& payload) const;
    std::string answer_abductive_fill(const std::string& payload) const;

    MockOracleConfig config_;
};

}  // namespace llmrg
