#include "llmrg/reason.hpp"

#include <algorithm>
#include <set>

namespace llmrg {

Signature context_signature(const std::string& attribute_label, const std::string& item_id) {
    ReasoningChain skeleton;
    skeleton.nodes.push_back({NodeKind::Attribute, attribute_label, ""});
    skeleton.nodes.push_back({NodeKind::Item, item_id, item_id});
    skeleton.target_item = item_id;
    return chain_signature(skeleton);
}

namespace {

std::vector<std::string> candidate_attributes(const Item& item,
                                              const std::vector<std::string>& user_attributes) {
    std::set<std::string> attrs;
    for (const auto& a : item.attributes) {
        if (auto label = canonicalize_label(a)) attrs.insert(*label);
    }
    for (const auto& a : user_attributes) {
        if (auto label = canonicalize_label(a)) attrs.insert(*label);
    }
    return {attrs.begin(), attrs.end()};  // sorted by construction
}

ReasoningChain degenerate_fallback(const Item& item,
                                   const std::vector<std::string>& attrs,
                                   std::int64_t id) {
    ReasoningChain chain;
    chain.id = id;
    if (!attrs.empty()) {
        chain.nodes.push_back({NodeKind::Attribute, attrs.front(), ""});
    } else {
        chain.nodes.push_back({NodeKind::Concept, "general interest", ""});
    }
    chain.nodes.push_back({NodeKind::Item, item.title, item.id});
    chain.relations.push_back("has attribute");
    chain.target_item = item.id;
    chain.score = 0;
    chain.degenerate = true;
    return chain;
}

}  // namespace

ExtendOutcome extend_graph_with_item(const ReasoningGraph& graph, const Item& item,
                                     const std::vector<std::string>& user_attributes,
                                     ReasonDeps& deps, const PipelineConfig& config,
                                     std::int64_t& next_chain_id) {
    ExtendOutcome outcome;
    const std::vector<std::string> attrs = candidate_attributes(item, user_attributes);

    // Knowledge base first: one candidate context per attribute.
    std::set<Signature> have;
    std::size_t probes = std::min(attrs.size(), static_cast<std::size_t>(config.chains_per_item));
    bool any_miss = probes == 0;
    for (std::size_t i = 0; i < probes; ++i) {
        auto cached = deps.kbase.lookup(context_signature(attrs[i], item.id));
        if (!cached) {
            any_miss = true;
            continue;
        }
        ++outcome.cache_hits;
        ReasoningChain chain = std::move(*cached);
        chain.id = next_chain_id++;
        chain.parent_chain = -1;  // parent ids belong to the run that cached it
        have.insert(chain_signature(chain));
        outcome.accepted.push_back(std::move(chain));
    }
    if (!any_miss && !outcome.accepted.empty()) {
        return outcome;  // fully served from the cache, zero backend calls
    }

    // Prompt the backend for new chains, one re-prompt on total parse failure.
    ChainReasoningPayload payload;
    payload.item_title = item.title;
    payload.item_attributes = item.attributes;
    payload.user_attributes = user_attributes;
    payload.max_chains = config.chains_per_item;
    for (const auto& chain : graph.chains) {
        payload.existing_chains.push_back({chain.id, render_chain_line(chain)});
    }

    ParsedChains parsed;
    bool ok = false;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        try {
            outcome.used_backend = true;
            parsed = parse_chains(deps.backend.complete(build_prompt(payload)));
            ok = true;
        } catch (const ChainParseError&) {
        } catch (const BackendError&) {
        }
    }
    if (!ok) {
        outcome.accepted.push_back(degenerate_fallback(item, attrs, next_chain_id++));
        return outcome;
    }

    std::set<std::int64_t> known_ids;
    for (const auto& chain : graph.chains) known_ids.insert(chain.id);

    int taken = 0;
    for (auto& chain : parsed.chains) {
        if (taken >= config.chains_per_item) break;
        if (chain.nodes.size() < 2 || chain.nodes.back().kind != NodeKind::Item) continue;
        chain.nodes.back().item_ref = item.id;
        chain.target_item = item.id;
        chain.origin = ChainOrigin::Observed;
        if (chain.parent_chain >= 0 && !known_ids.count(chain.parent_chain)) {
            chain.parent_chain = -1;
        }
        const Signature full_sig = chain_signature(chain);
        if (have.count(full_sig)) continue;  // already served from the cache
        have.insert(full_sig);
        ++taken;

        // Verify: per-chain rng keyed on (chain text, item, seed) keeps the
        // whole build order-independent and reproducible.
        std::mt19937_64 rng(stable_hash64(render_chain_line(chain) + "\x1f" + item.id,
                                          config.seed));
        VerifyOutcome verdict = verify_chain(chain, deps.backend, deps.idf, rng);
        chain.id = next_chain_id;  // ids only advance for chains we keep

        if (verdict.unverifiable) {
            chain.score = 0;
            chain.degenerate = true;  // flagged low-confidence, kept out of the cache
            ++next_chain_id;
            outcome.accepted.push_back(std::move(chain));
            continue;
        }
        chain.score = verdict.score;
        if (chain.score >= config.tau) {
            ++next_chain_id;
            deps.kbase.insert(full_sig, chain, chain.score, config.tau);
            if (chain.nodes.front().kind == NodeKind::Attribute) {
                deps.kbase.insert(context_signature(chain.nodes.front().label, item.id),
                                  chain, chain.score, config.tau);
            }
            outcome.accepted.push_back(std::move(chain));
        } else {
            outcome.rejected.push_back({next_chain_id, chain.score, config.tau,
                                        verdict.masked_node, verdict.prediction});
        }
    }

    if (outcome.accepted.empty()) {
        // Everything was filtered; keep the item reachable in the graph.
        outcome.accepted.push_back(degenerate_fallback(item, attrs, next_chain_id++));
    }
    return outcome;
}

BuildResult build_reasoning_graph(const InteractionSequence& sequence,
                                  ReasonDeps& deps, const PipelineConfig& config) {
    BuildResult result;
    std::size_t begin = sequence.events.size() > config.l_tru
                            ? sequence.events.size() - config.l_tru
                            : 0;
    for (std::size_t t = begin; t < sequence.events.size(); ++t) {
        const Item* item = deps.catalog.find(sequence.events[t]);
        if (!item) continue;  // events are validated at ingest; be lenient here
        ExtendOutcome outcome =
            extend_graph_with_item(result.graph, *item, sequence.attributes, deps, config,
                                   result.next_chain_id);
        for (const auto& chain : outcome.accepted) result.graph.merge_chain(chain);
        result.rejected.insert(result.rejected.end(), outcome.rejected.begin(),
                               outcome.rejected.end());
    }
    return result;
}

}  // namespace llmrg
