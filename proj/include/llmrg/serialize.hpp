// Flat-file JSON serialization for domain values plus Graphviz DOT export.

#pragma once

#include "json.hpp"

#include <string>
#include <vector>

#include "llmrg/domain.hpp"

namespace llmrg {

nlohmann::json catalog_to_json(const Catalog& catalog);
Catalog catalog_from_json(const nlohmann::json& j);

nlohmann::json sequences_to_json(const std::vector<InteractionSequence>& sequences);
std::vector<InteractionSequence> sequences_from_json(const nlohmann::json& j);

// Graph schema:
//   {"nodes":[{"kind","label","item_ref"}],
//    "edges":[{"src","dst","relation","chains":[ids]}],
//    "chains":[{"id","nodes":[indices],"relations",
//               "target_item","score","origin","parent","degenerate"}]}
// Standalone chain record with embedded nodes (used by the cache journal).
nlohmann::json chain_to_json(const ReasoningChain& chain);
ReasoningChain chain_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const ReasoningGraph& graph);
ReasoningGraph graph_from_json(const nlohmann::json& j);

nlohmann::json user_graphs_to_json(const UserGraphs& graphs);
UserGraphs user_graphs_from_json(const nlohmann::json& j);

// DOT export mirroring the JSON schema: node shape by kind, edge label =
// relation. Divergent edges are drawn red, matching the paper-style figures.
std::string user_graphs_to_dot(const UserGraphs& graphs);

// Helpers for whole-file IO with stable formatting (2-space indent, sorted
// keys), so identical inputs always produce byte-identical files.
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace llmrg
