#include "llmrg/diverge.hpp"

#include <algorithm>

namespace llmrg {

std::vector<std::string> extend_chain(const ReasoningChain& chain, Backend& backend, int k) {
    DivergentExtensionPayload payload;
    payload.chain_text = render_chain_line(chain);
    payload.max_candidates = k;
    std::vector<std::string> candidates;
    try {
        candidates = parse_candidates(backend.complete(build_prompt(payload)));
    } catch (const BackendError&) {
        return {};
    }
    if (candidates.size() > static_cast<std::size_t>(k)) candidates.resize(k);
    return candidates;
}

std::vector<std::string> ground_candidates(const std::vector<std::string>& candidates,
                                           const std::set<std::string>& observed_items,
                                           const TitleIndex& index, double theta_sim) {
    std::vector<std::string> grounded;
    for (const auto& text : candidates) {
        auto top = index.retrieve_top_k(text, 1);
        if (top.empty() || top.front().score < theta_sim) continue;
        const std::string& id = top.front().item_id;
        if (observed_items.count(id)) continue;
        if (std::find(grounded.begin(), grounded.end(), id) == grounded.end()) {
            grounded.push_back(id);
        }
    }
    return grounded;
}

DivergeResult build_divergent_graph(const ReasoningGraph& reasoning_graph,
                                    const std::set<std::string>& observed_items,
                                    DivergeDeps& deps, const PipelineConfig& config,
                                    std::int64_t next_chain_id) {
    DivergeResult result;
    for (const auto& chain : reasoning_graph.chains) {
        if (chain.degenerate || chain.score < config.tau) continue;
        auto candidates = extend_chain(chain, deps.backend, config.divergent_k);
        auto grounded = ground_candidates(candidates, observed_items, deps.title_index,
                                          config.theta_sim);
        for (const auto& item_id : grounded) {
            const Item* item = deps.catalog.find(item_id);
            if (!item) continue;

            ReasoningChain extension;
            extension.nodes = chain.nodes;
            // The old terminal keeps its item marker mid-chain.
            extension.relations = chain.relations;
            extension.relations.push_back("extends to");
            extension.nodes.push_back({NodeKind::Item, item->title, item->id});
            extension.target_item = item->id;
            extension.origin = ChainOrigin::Divergent;
            extension.parent_chain = chain.id;

            std::mt19937_64 rng(stable_hash64(render_chain_line(extension), config.seed));
            VerifyOutcome verdict = verify_chain(extension, deps.backend, deps.idf, rng);
            extension.score = verdict.unverifiable ? 0 : verdict.score;
            if (!verdict.unverifiable && extension.score >= config.tau) {
                extension.id = next_chain_id++;
                result.graph.merge_chain(extension);
            } else {
                result.rejected.push_back({next_chain_id, extension.score, config.tau,
                                           verdict.masked_node, verdict.prediction});
            }
        }
    }
    return result;
}

}  // namespace llmrg
