#include "llmrg/mock_oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace llmrg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// "a | b | c" -> {"a","b","c"}; "none" -> {}
std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (trim(text) == "none") return out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t next = text.find('|', pos);
        std::string part = trim(text.substr(pos, next == std::string::npos ? next : next - pos));
        if (!part.empty()) out.push_back(part);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

// Value of a "KEY: value" payload line, or empty.
std::string field(const std::string& payload, const std::string& key) {
    std::istringstream is(payload);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind(key + ":", 0) == 0) return trim(line.substr(key.size() + 1));
    }
    return {};
}

std::vector<std::string> split_arrow(const std::string& text) {
    std::vector<std::string> segs;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = text.find("->", pos);
        segs.push_back(trim(text.substr(pos, next == std::string::npos ? next : next - pos)));
        if (next == std::string::npos) break;
        pos = next + 2;
    }
    return segs;
}

bool unwrap_marker(const std::string& seg, const char* marker, std::string& inner) {
    std::string prefix = std::string(marker) + "[";
    if (seg.rfind(prefix, 0) != 0 || seg.empty() || seg.back() != ']') return false;
    inner = seg.substr(prefix.size(), seg.size() - prefix.size() - 1);
    return true;
}

std::size_t index_of(const std::vector<std::string>& pool, const std::string& value) {
    auto it = std::find(pool.begin(), pool.end(), value);
    return it == pool.end() ? pool.size() : static_cast<std::size_t>(it - pool.begin());
}

// An element from the pool guaranteed different from `correct`.
std::string decoy_from(const std::vector<std::string>& pool, const std::string& correct) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::size_t at = index_of(pool, correct);
        std::size_t pick = (at < pool.size() ? at + 1 + i : i) % pool.size();
        if (pool[pick] != correct) return pool[pick];
    }
    return correct + " alt";
}

}  // namespace

MockBackend::MockBackend(MockOracleConfig config) : config_(std::move(config)) {
    if (config_.fidelity < 0.0 || config_.fidelity > 1.0) {
        throw std::invalid_argument("mock fidelity must lie in [0,1]");
    }
}

std::string MockBackend::complete(const Prompt& prompt) {
    counters_.logical.fetch_add(1, std::memory_order_relaxed);
    counters_.attempts.fetch_add(1, std::memory_order_relaxed);
    switch (prompt.task_kind) {
        case TaskKind::ChainReasoning: return answer_chain_reasoning(prompt.payload);
        case TaskKind::DivergentExtension: return answer_divergent_extension(prompt.payload);
        case TaskKind::AbductiveFill: return answer_abductive_fill(prompt.payload);
    }
    throw BackendError("unknown task kind");
}

std::string MockBackend::answer_chain_reasoning(const std::string& payload) const {
    const std::string title = field(payload, "ITEM");
    const int max_chains = std::max(1, std::atoi(field(payload, "MAX_CHAINS").c_str()));

    std::vector<std::string> attrs = split_list(field(payload, "ITEM_ATTRIBUTES"));
    for (auto& a : split_list(field(payload, "USER_ATTRIBUTES"))) {
        if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
    }
    std::sort(attrs.begin(), attrs.end());

    // Existing chains, for link decisions: attr label of each chain line.
    std::vector<std::pair<std::int64_t, std::string>> existing;  // (id, attr)
    {
        std::istringstream is(payload);
        std::string line;
        while (std::getline(is, line)) {
            std::string body = trim(line);
            if (body.empty() || body[0] != '[') continue;
            std::size_t close = body.find(']');
            if (close == std::string::npos) continue;
            std::int64_t id = std::atoll(body.substr(1, close - 1).c_str());
            std::string inner;
            auto segs = split_arrow(trim(body.substr(close + 1)));
            if (!segs.empty() && unwrap_marker(segs[0], "ATTR", inner)) {
                existing.emplace_back(id, inner);
            }
        }
    }

    std::ostringstream os;
    int emitted = 0;
    for (const auto& attr : attrs) {
        if (emitted >= max_chains) break;
        auto it = config_.table.find(attr);
        if (it == config_.table.end() || it->second.concepts.empty()) continue;
        const auto& entry = it->second;
        std::size_t at = index_of(entry.items, title);
        std::string concept_label = at < entry.items.size()
            ? entry.concepts[at % entry.concepts.size()]
            : entry.concepts[stable_hash64(attr + "\x1f" + title, config_.seed)
                             % entry.concepts.size()];
        std::int64_t link = -1;
        for (const auto& [id, a] : existing) {
            if (a == attr) { link = id; break; }
        }
        os << "CHAIN";
        if (link >= 0) os << "(LINK=" << link << ")";
        os << ": ATTR[" << attr << "] -> " << concept_label << " -> TARGET[" << title << "]\n";
        ++emitted;
    }
    if (emitted == 0) {
        // No table coverage: one generic rooted chain so the item still lands
        // in the graph.
        if (!attrs.empty()) {
            os << "CHAIN: ATTR[" << attrs.front() << "] -> interest in " << attrs.front()
               << " -> TARGET[" << title << "]\n";
        } else {
            os << "CHAIN: general interest -> TARGET[" << title << "]\n";
        }
    }
    return os.str();
}

std::string MockBackend::answer_divergent_extension(const std::string& payload) const {
    const int max_candidates = std::max(1, std::atoi(field(payload, "MAX_CANDIDATES").c_str()));
    auto segs = split_arrow(field(payload, "CHAIN"));
    if (segs.size() < 2) return {};
    std::string attr, target;
    if (!unwrap_marker(segs.front(), "ATTR", attr)) return {};
    if (!unwrap_marker(segs.back(), "TARGET", target)) return {};

    auto it = config_.table.find(attr);
    if (it == config_.table.end() || it->second.items.empty()) return {};
    const auto& items = it->second.items;

    std::size_t at = index_of(items, target);
    std::size_t start = at < items.size()
        ? at + 1
        : stable_hash64(attr + "\x1f" + target, config_.seed) % items.size();

    std::ostringstream os;
    int emitted = 0;
    for (std::size_t i = 0; i < items.size() && emitted < max_candidates; ++i) {
        const std::string& candidate = items[(start + i) % items.size()];
        if (candidate == target) continue;
        os << "ITEM: " << candidate << "\n";
        ++emitted;
    }
    return os.str();
}

std::string MockBackend::answer_abductive_fill(const std::string& payload) const {
    auto segs = split_arrow(field(payload, "MASKED_CHAIN"));
    if (segs.size() < 2) return {};

    struct Seg {
        enum Kind { Attr, Item, Target, Concept } kind = Concept;
        std::string label;
        bool masked = false;
    };
    std::vector<Seg> chain;
    std::size_t mask_at = segs.size();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        Seg seg;
        std::string inner;
        if (unwrap_marker(segs[i], "TARGET", inner)) seg.kind = Seg::Target;
        else if (unwrap_marker(segs[i], "ATTR", inner)) seg.kind = Seg::Attr;
        else if (unwrap_marker(segs[i], "ITEM", inner)) seg.kind = Seg::Item;
        else inner = segs[i];
        seg.label = inner;
        seg.masked = inner == "[Mask]";
        if (seg.masked) mask_at = i;
        chain.push_back(std::move(seg));
    }
    if (mask_at == segs.size()) return {};

    // Reconstruct the most table-consistent fill from the unmasked context.
    // The chain shapes produced by this oracle make every item/attribute node
    // recoverable exactly.
    std::string attr = chain[0].kind == Seg::Attr && !chain[0].masked ? chain[0].label : "";
    std::string concept_label;
    for (const auto& seg : chain) {
        if (seg.kind == Seg::Concept && !seg.masked) { concept_label = seg.label; break; }
    }

    std::string correct;
    std::vector<std::string> pool;

    const Seg& masked = chain[mask_at];
    if (masked.kind == Seg::Attr || (mask_at == 0 && masked.kind == Seg::Concept)) {
        for (const auto& [key, entry] : config_.table) {
            pool.push_back(key);
            if (correct.empty() &&
                std::find(entry.concepts.begin(), entry.concepts.end(), concept_label) !=
                    entry.concepts.end()) {
                correct = key;
            }
        }
        if (correct.empty()) {
            for (const auto& [key, entry] : config_.table) {
                if (std::find(entry.items.begin(), entry.items.end(),
                              chain.back().label) != entry.items.end()) {
                    correct = key;
                    break;
                }
            }
        }
        if (correct.empty() && !pool.empty()) correct = pool.front();
    } else if (masked.kind == Seg::Target || masked.kind == Seg::Item) {
        auto it = config_.table.find(attr);
        if (it == config_.table.end() || it->second.items.empty()) return {};
        const auto& entry = it->second;
        pool = entry.items;

        // Divergent shape [attr, concept, item, target]: the terminal was the
        // extension candidate right after the mid item. Otherwise the item is
        // the one paired with the visible concept.
        std::string mid_item;
        for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
            if (chain[i].kind == Seg::Item && !chain[i].masked) mid_item = chain[i].label;
        }
        if (masked.kind == Seg::Target && !mid_item.empty()) {
            std::size_t at = index_of(entry.items, mid_item);
            if (at == entry.items.size()) return {};
            for (std::size_t i = 1; i <= entry.items.size(); ++i) {
                const std::string& c = entry.items[(at + i) % entry.items.size()];
                if (c != mid_item) { correct = c; break; }
            }
        } else {
            std::size_t cidx = index_of(entry.concepts, concept_label);
            if (cidx == entry.concepts.size()) {
                correct = entry.items[stable_hash64(attr + "\x1f" + concept_label, config_.seed)
                                      % entry.items.size()];
            } else {
                for (std::size_t i = 0; i < entry.items.size(); ++i) {
                    if (i % entry.concepts.size() == cidx) { correct = entry.items[i]; break; }
                }
                if (correct.empty()) correct = entry.items[cidx % entry.items.size()];
            }
        }
    } else {
        // Masked concept: pair it back from the terminal item.
        auto it = config_.table.find(attr);
        if (it == config_.table.end() || it->second.concepts.empty()) return {};
        const auto& entry = it->second;
        pool = entry.concepts;
        std::size_t at = index_of(entry.items, chain.back().label);
        correct = at < entry.items.size()
            ? entry.concepts[at % entry.concepts.size()]
            : entry.concepts[stable_hash64(attr + "\x1f" + chain.back().label, config_.seed)
                             % entry.concepts.size()];
    }
    if (correct.empty()) return {};

    // Per-request coin: uniform in [0,1) from (seed, payload).
    const double u = static_cast<double>(stable_hash64(payload, config_.seed) >> 11) *
                     (1.0 / 9007199254740992.0);
    if (u < config_.fidelity) return correct + "\n";
    return decoy_from(pool, correct) + "\n";
}

}  // namespace llmrg
