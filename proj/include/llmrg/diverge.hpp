// Divergent extension: imaginary single-step continuations of each retained
// chain, grounded to unconsumed catalog items and verified with the same
// threshold as observed chains.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "llmrg/config.hpp"
#include "llmrg/domain.hpp"
#include "llmrg/ground.hpp"
#include "llmrg/llm.hpp"
#include "llmrg/verify.hpp"

namespace llmrg {

// Up to K deduplicated candidate next-item texts. Parse failure yields an
// empty list for the chain.
std::vector<std::string> extend_chain(const ReasoningChain& chain, Backend& backend, int k);

// Maps each candidate to its top-1 catalog title by similarity; kept iff the
// similarity clears theta_sim and the item was not already consumed.
// Deduplicated, in candidate order.
std::vector<std::string> ground_candidates(const std::vector<std::string>& candidates,
                                           const std::set<std::string>& observed_items,
                                           const TitleIndex& index, double theta_sim);

struct DivergeDeps {
    Backend& backend;
    const IdfTable& idf;
    const TitleIndex& title_index;
    const Catalog& catalog;
};

struct DivergeResult {
    DivergentGraph graph;
    std::vector<RejectedChain> rejected;
};

// phi, second half: extend every retained (non-degenerate) chain of the
// observed graph, ground, verify, and merge in stable chain-id order.
// next_chain_id continues the observed graph's numbering.
DivergeResult build_divergent_graph(const ReasoningGraph& reasoning_graph,
                                    const std::set<std::string>& observed_items,
                                    DivergeDeps& deps, const PipelineConfig& config,
                                    std::int64_t next_chain_id);

}  // namespace llmrg
