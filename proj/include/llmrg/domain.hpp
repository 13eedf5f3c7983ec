// Core data model shared by every stage of the pipeline: catalog, user
// interaction sequences, reasoning chains and the graphs built from them.
//
// All values here are plain data, immutable by convention after construction,
// and safe to share across threads.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace llmrg {

// ---------------------------------------------------------------------------
// Catalog

struct Item {
    std::string id;                       // opaque, unique within a catalog
    std::string title;                    // canonicalized, non-empty
    std::vector<std::string> attributes;  // deduplicated, canonicalized
};

struct Catalog {
    std::vector<Item> items;
    std::map<std::string, int> index;  // item id -> dense position 0..|V|-1

    void add(Item item);
    const Item* find(const std::string& id) const;
    int position(const std::string& id) const;  // -1 if absent
    std::size_t size() const { return items.size(); }
};

struct InteractionSequence {
    std::string user_id;
    std::vector<std::string> events;      // item ids, chronological, deduped
    std::vector<std::string> attributes;  // user attributes A_u
};

// ---------------------------------------------------------------------------
// Reasoning chains and graphs

enum class NodeKind { Item, Attribute, Concept };

const char* node_kind_name(NodeKind kind);
std::optional<NodeKind> node_kind_from_name(const std::string& name);

struct ChainNode {
    NodeKind kind = NodeKind::Concept;
    std::string label;     // canonical (lowercase, collapsed whitespace)
    std::string item_ref;  // catalog id, set iff kind == Item

    // Node identity is (kind, label); graphs merge nodes on this key.
    std::string identity_key() const;

    bool operator==(const ChainNode& other) const = default;
};

enum class ChainOrigin { Observed, Divergent, Cached };

const char* chain_origin_name(ChainOrigin origin);
std::optional<ChainOrigin> chain_origin_from_name(const std::string& name);

constexpr int kUnscored = -1;

struct ReasoningChain {
    std::int64_t id = -1;
    std::vector<ChainNode> nodes;        // >= 2 once complete
    std::vector<std::string> relations;  // relations[i] labels nodes[i]->nodes[i+1]
    std::string target_item;             // catalog id the chain motivates
    int score = kUnscored;               // 0..100 once verified
    ChainOrigin origin = ChainOrigin::Observed;
    std::int64_t parent_chain = -1;      // id of the chain this one links to, or -1
    bool degenerate = false;             // fallback chain, bypasses scoring and cache

    bool scored() const { return score != kUnscored; }
};

// 128-bit chain digest used as the knowledge-base key.
struct Signature {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    auto operator<=>(const Signature&) const = default;
    std::string hex() const;
    static std::optional<Signature> from_hex(const std::string& text);
};

// Directed graph formed as the union of retained chains. Nodes are unioned by
// identity key, edges deduplicated by (src, dst, relation). The same shape
// serves both the observed reasoning graph and the divergent graph.
struct ReasoningGraph {
    struct Edge {
        int src = -1;
        int dst = -1;
        std::string relation;
        std::vector<std::int64_t> chains;  // ids of chains contributing this edge
    };

    std::vector<ChainNode> nodes;
    std::map<std::string, int> node_index;  // identity key -> index
    std::vector<Edge> edges;
    std::vector<ReasoningChain> chains;  // retained chains, stable id order

    bool empty() const { return nodes.empty(); }

    // Unions the chain's nodes and consecutive edges into the graph and
    // appends the chain to the retained list.
    void merge_chain(const ReasoningChain& chain);

    int find_node(const ChainNode& node) const;
};

using DivergentGraph = ReasoningGraph;

// Observed and divergent graphs for one user, as built by the pipeline.
struct UserGraphs {
    std::string user_id;
    ReasoningGraph observed;
    DivergentGraph divergent;
};

struct EmbeddingBundle {
    std::vector<double> e_ori;
    std::vector<double> e_div;
    std::vector<double> e_base;
    std::vector<double> e_fusion;
};

// ---------------------------------------------------------------------------
// Operations

// Lowercases, collapses internal whitespace, strips surrounding punctuation.
// Returns nullopt when nothing is left after normalization.
std::optional<std::string> canonicalize_label(const std::string& text);

// Seeded 64-bit string hash, stable across platforms and runs. Shared by the
// chain signature, the mock oracle's per-request randomness, and the encoder's
// node-feature bucketing.
std::uint64_t stable_hash64(const std::string& data, std::uint64_t seed = 0);

// Stable digest over (sorted non-terminal node labels, target item id).
// Chains that differ only in the construction order of equal-label node sets
// hash identically.
Signature chain_signature(const ReasoningChain& chain);

}  // namespace llmrg
