// Chained graph reasoning: iterate the user's sequence in order, attach or
// create reasoning chains per item, consulting the knowledge base before any
// backend call. Verified chains (score >= tau) are retained, cached and
// merged into the evolving graph.

#pragma once

#include <cstdint>
#include <vector>

#include "llmrg/config.hpp"
#include "llmrg/domain.hpp"
#include "llmrg/ground.hpp"
#include "llmrg/kbase.hpp"
#include "llmrg/llm.hpp"
#include "llmrg/verify.hpp"

namespace llmrg {

struct ReasonDeps {
    Backend& backend;
    KnowledgeBase& kbase;
    const IdfTable& idf;
    const Catalog& catalog;
};

// Cache lookup key for "chains about item X driven by attribute A": the
// signature of the two-node skeleton chain ATTR[a] -> TARGET[item]. Retained
// chains are stored under both this key and their full chain signature, so
// a repeat of the same (attribute, item) context is served without a call.
Signature context_signature(const std::string& attribute_label, const std::string& item_id);

struct ExtendOutcome {
    std::vector<ReasoningChain> accepted;   // verified or cached, merged by caller
    std::vector<RejectedChain> rejected;    // audit records for the reject log
    int cache_hits = 0;
    bool used_backend = false;
};

// One step of chained reasoning. `graph` holds everything built from the
// sequence prefix; accepted chains carry fresh ids from next_chain_id.
// Backend/parse failure (after one re-prompt) degrades to a degenerate
// attribute->item chain with score 0 that never enters the cache.
ExtendOutcome extend_graph_with_item(const ReasoningGraph& graph, const Item& item,
                                     const std::vector<std::string>& user_attributes,
                                     ReasonDeps& deps, const PipelineConfig& config,
                                     std::int64_t& next_chain_id);

struct BuildResult {
    ReasoningGraph graph;
    std::vector<RejectedChain> rejected;
    std::int64_t next_chain_id = 0;
};

// phi, first half: the observed reasoning graph over the (already truncated)
// sequence, processed strictly in order.
BuildResult build_reasoning_graph(const InteractionSequence& sequence,
                                  ReasonDeps& deps, const PipelineConfig& config);

}  // namespace llmrg
