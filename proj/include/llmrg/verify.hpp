// Self-verification of reasoning chains: mask one item/attribute node, ask
// the backend to fill it back in, score the fill against the original, and
// filter by threshold.

#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "llmrg/domain.hpp"
#include "llmrg/ground.hpp"
#include "llmrg/llm.hpp"

namespace llmrg {

struct MaskedChain {
    std::string text;          // rendered chain with [Mask] at the chosen node
    std::size_t mask_index = 0;
    ChainNode original;        // the node that was masked out
};

// Picks one item/attribute node uniformly. Returns nullopt when the chain has
// no maskable node; such chains pass unverifiable with score 0.
std::optional<MaskedChain> mask_chain(const ReasoningChain& chain, std::mt19937_64& rng);

// Single fill-in from the backend, canonicalized. Empty on an empty fill.
std::string abduce(const MaskedChain& masked, Backend& backend);

// round(100 * cosine); exact string equality forces 100.
int score_match(const std::string& prediction, const std::string& original,
                const IdfTable& idf);

struct RejectedChain {
    std::int64_t chain_id = -1;
    int score = 0;
    int threshold = 0;
    std::string masked_node;
    std::string prediction;
};

struct FilterResult {
    std::vector<ReasoningChain> retained;  // score >= tau, inclusive
    std::vector<RejectedChain> rejected;
};

FilterResult filter_chains(std::vector<ReasoningChain> scored_chains, int tau);

// Full verification of one chain: mask, abduce, score. Chains with no
// maskable node come back with score 0 and unverifiable=true.
struct VerifyOutcome {
    int score = 0;
    bool unverifiable = false;
    std::string masked_node;
    std::string prediction;
};

VerifyOutcome verify_chain(const ReasoningChain& chain, Backend& backend,
                           const IdfTable& idf, std::mt19937_64& rng);

}  // namespace llmrg
