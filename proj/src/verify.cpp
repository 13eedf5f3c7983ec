#include "llmrg/verify.hpp"

#include <algorithm>
#include <cmath>

namespace llmrg {

std::optional<MaskedChain> mask_chain(const ReasoningChain& chain, std::mt19937_64& rng) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        NodeKind kind = chain.nodes[i].kind;
        if (kind == NodeKind::Item || kind == NodeKind::Attribute) {
            candidates.push_back(i);
        }
    }
    if (candidates.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t index = candidates[pick(rng)];
    MaskedChain masked;
    masked.mask_index = index;
    masked.original = chain.nodes[index];
    masked.text = render_masked_chain(chain, index);
    return masked;
}

std::string abduce(const MaskedChain& masked, Backend& backend) {
    AbductiveFillPayload payload{masked.text};
    std::string raw = backend.complete(build_prompt(payload));
    // First non-empty line is the fill.
    std::size_t begin = raw.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    std::size_t end = raw.find('\n', begin);
    std::string line = raw.substr(begin, end == std::string::npos ? end : end - begin);
    return canonicalize_label(line).value_or(std::string{});
}

int score_match(const std::string& prediction, const std::string& original,
                const IdfTable& idf) {
    if (prediction == original) return 100;
    const double cos = similarity(embed_text(prediction, idf), embed_text(original, idf));
    return static_cast<int>(std::lround(100.0 * cos));
}

FilterResult filter_chains(std::vector<ReasoningChain> scored_chains, int tau) {
    FilterResult result;
    for (auto& chain : scored_chains) {
        if (chain.score >= tau) {
            result.retained.push_back(std::move(chain));
        } else {
            result.rejected.push_back({chain.id, chain.score, tau, "", ""});
        }
    }
    return result;
}

VerifyOutcome verify_chain(const ReasoningChain& chain, Backend& backend,
                           const IdfTable& idf, std::mt19937_64& rng) {
    VerifyOutcome outcome;
    auto masked = mask_chain(chain, rng);
    if (!masked) {
        outcome.unverifiable = true;
        return outcome;
    }
    outcome.masked_node = masked->original.label;
    outcome.prediction = abduce(*masked, backend);
    if (outcome.prediction.empty()) return outcome;  // score stays 0
    outcome.score = score_match(outcome.prediction, masked->original.label, idf);
    return outcome;
}

}  // namespace llmrg
