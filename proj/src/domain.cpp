#include "llmrg/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace llmrg {

void Catalog::add(Item item) {
    if (index.count(item.id)) {
        throw std::invalid_argument("duplicate item id: " + item.id);
    }
    index[item.id] = static_cast<int>(items.size());
    items.push_back(std::move(item));
}

const Item* Catalog::find(const std::string& id) const {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &items[it->second];
}

int Catalog::position(const std::string& id) const {
    auto it = index.find(id);
    return it == index.end() ? -1 : it->second;
}

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::Item: return "item";
        case NodeKind::Attribute: return "attribute";
        case NodeKind::Concept: return "concept";
    }
    return "concept";
}

std::optional<NodeKind> node_kind_from_name(const std::string& name) {
    if (name == "item") return NodeKind::Item;
    if (name == "attribute") return NodeKind::Attribute;
    if (name == "concept") return NodeKind::Concept;
    return std::nullopt;
}

std::string ChainNode::identity_key() const {
    std::string key = node_kind_name(kind);
    key.push_back('\x1f');
    key += label;
    return key;
}

const char* chain_origin_name(ChainOrigin origin) {
    switch (origin) {
        case ChainOrigin::Observed: return "observed";
        case ChainOrigin::Divergent: return "divergent";
        case ChainOrigin::Cached: return "cached";
    }
    return "observed";
}

std::optional<ChainOrigin> chain_origin_from_name(const std::string& name) {
    if (name == "observed") return ChainOrigin::Observed;
    if (name == "divergent") return ChainOrigin::Divergent;
    if (name == "cached") return ChainOrigin::Cached;
    return std::nullopt;
}

std::string Signature::hex() const {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

std::optional<Signature> Signature::from_hex(const std::string& text) {
    if (text.size() != 32) return std::nullopt;
    for (char c : text) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    Signature sig;
    sig.hi = std::stoull(text.substr(0, 16), nullptr, 16);
    sig.lo = std::stoull(text.substr(16), nullptr, 16);
    return sig;
}

void ReasoningGraph::merge_chain(const ReasoningChain& chain) {
    std::vector<int> ids(chain.nodes.size());
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        const std::string key = chain.nodes[i].identity_key();
        auto it = node_index.find(key);
        if (it == node_index.end()) {
            it = node_index.emplace(key, static_cast<int>(nodes.size())).first;
            nodes.push_back(chain.nodes[i]);
        }
        ids[i] = it->second;
    }
    for (std::size_t i = 0; i + 1 < chain.nodes.size(); ++i) {
        const std::string& rel =
            i < chain.relations.size() ? chain.relations[i] : std::string();
        auto existing = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) {
            return e.src == ids[i] && e.dst == ids[i + 1] && e.relation == rel;
        });
        if (existing != edges.end()) {
            existing->chains.push_back(chain.id);
        } else {
            edges.push_back({ids[i], ids[i + 1], rel, {chain.id}});
        }
    }
    chains.push_back(chain);
}

int ReasoningGraph::find_node(const ChainNode& node) const {
    auto it = node_index.find(node.identity_key());
    return it == node_index.end() ? -1 : it->second;
}

std::optional<std::string> canonicalize_label(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    // Strip surrounding punctuation; interior punctuation is preserved.
    std::size_t begin = 0, end = out.size();
    while (begin < end && std::ispunct(static_cast<unsigned char>(out[begin]))) ++begin;
    while (end > begin && std::ispunct(static_cast<unsigned char>(out[end - 1]))) --end;
    out = out.substr(begin, end - begin);
    if (out.empty()) return std::nullopt;
    return out;
}

// 64-bit FNV-1a with a splitmix finalizer; two seeded lanes give 128 bits.
std::uint64_t stable_hash64(const std::string& data, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
}

Signature chain_signature(const ReasoningChain& chain) {
    if (chain.nodes.size() < 2) {
        throw std::invalid_argument("chain_signature requires >= 2 nodes");
    }
    std::vector<std::string> labels;
    labels.reserve(chain.nodes.size());
    for (std::size_t i = 0; i + 1 < chain.nodes.size(); ++i) {
        labels.push_back(chain.nodes[i].identity_key());
    }
    std::sort(labels.begin(), labels.end());
    std::string material;
    for (const auto& label : labels) {
        material += label;
        material.push_back('\x1e');
    }
    material.push_back('\x1d');
    material += chain.target_item;
    return {stable_hash64(material, 0x243f6a8885a308d3ull),
            stable_hash64(material, 0x13198a2e03707344ull)};
}

}  // namespace llmrg
