#include "llmrg/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace llmrg {

using nlohmann::json;

json catalog_to_json(const Catalog& catalog) {
    json items = json::array();
    for (const auto& item : catalog.items) {
        items.push_back({{"id", item.id},
                         {"title", item.title},
                         {"attributes", item.attributes}});
    }
    return {{"items", items}};
}

Catalog catalog_from_json(const json& j) {
    Catalog catalog;
    for (const auto& rec : j.at("items")) {
        Item item;
        item.id = rec.at("id").get<std::string>();
        item.title = rec.at("title").get<std::string>();
        item.attributes = rec.at("attributes").get<std::vector<std::string>>();
        catalog.add(std::move(item));
    }
    return catalog;
}

json sequences_to_json(const std::vector<InteractionSequence>& sequences) {
    json users = json::array();
    for (const auto& seq : sequences) {
        users.push_back({{"user_id", seq.user_id},
                         {"events", seq.events},
                         {"attributes", seq.attributes}});
    }
    return {{"users", users}};
}

std::vector<InteractionSequence> sequences_from_json(const json& j) {
    std::vector<InteractionSequence> out;
    for (const auto& rec : j.at("users")) {
        InteractionSequence seq;
        seq.user_id = rec.at("user_id").get<std::string>();
        seq.events = rec.at("events").get<std::vector<std::string>>();
        seq.attributes = rec.at("attributes").get<std::vector<std::string>>();
        out.push_back(std::move(seq));
    }
    return out;
}

namespace {

json node_to_json(const ChainNode& node) {
    return {{"kind", node_kind_name(node.kind)},
            {"label", node.label},
            {"item_ref", node.item_ref}};
}

ChainNode node_from_json(const json& j) {
    ChainNode node;
    auto kind = node_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown node kind in graph JSON");
    node.kind = *kind;
    node.label = j.at("label").get<std::string>();
    node.item_ref = j.at("item_ref").get<std::string>();
    return node;
}

}  // namespace

json chain_to_json(const ReasoningChain& chain) {
    json nodes = json::array();
    for (const auto& node : chain.nodes) nodes.push_back(node_to_json(node));
    return {{"id", chain.id},
            {"nodes", nodes},
            {"relations", chain.relations},
            {"target_item", chain.target_item},
            {"score", chain.score},
            {"origin", chain_origin_name(chain.origin)},
            {"parent", chain.parent_chain},
            {"degenerate", chain.degenerate}};
}

ReasoningChain chain_from_json(const json& j) {
    ReasoningChain chain;
    chain.id = j.at("id").get<std::int64_t>();
    for (const auto& rec : j.at("nodes")) chain.nodes.push_back(node_from_json(rec));
    chain.relations = j.at("relations").get<std::vector<std::string>>();
    chain.target_item = j.at("target_item").get<std::string>();
    chain.score = j.at("score").get<int>();
    auto origin = chain_origin_from_name(j.at("origin").get<std::string>());
    if (!origin) throw std::runtime_error("unknown chain origin");
    chain.origin = *origin;
    chain.parent_chain = j.at("parent").get<std::int64_t>();
    chain.degenerate = j.at("degenerate").get<bool>();
    return chain;
}

json graph_to_json(const ReasoningGraph& graph) {
    json nodes = json::array();
    for (const auto& node : graph.nodes) nodes.push_back(node_to_json(node));

    json edges = json::array();
    for (const auto& edge : graph.edges) {
        edges.push_back({{"src", edge.src},
                         {"dst", edge.dst},
                         {"relation", edge.relation},
                         {"chains", edge.chains}});
    }

    json chains = json::array();
    for (const auto& chain : graph.chains) {
        std::vector<int> node_ids;
        node_ids.reserve(chain.nodes.size());
        for (const auto& node : chain.nodes) {
            node_ids.push_back(graph.node_index.at(node.identity_key()));
        }
        chains.push_back({{"id", chain.id},
                          {"nodes", node_ids},
                          {"relations", chain.relations},
                          {"target_item", chain.target_item},
                          {"score", chain.score},
                          {"origin", chain_origin_name(chain.origin)},
                          {"parent", chain.parent_chain},
                          {"degenerate", chain.degenerate}});
    }

    return {{"nodes", nodes}, {"edges", edges}, {"chains", chains}};
}

ReasoningGraph graph_from_json(const json& j) {
    ReasoningGraph graph;
    for (const auto& rec : j.at("nodes")) {
        ChainNode node = node_from_json(rec);
        graph.node_index[node.identity_key()] = static_cast<int>(graph.nodes.size());
        graph.nodes.push_back(std::move(node));
    }
    for (const auto& rec : j.at("edges")) {
        ReasoningGraph::Edge edge;
        edge.src = rec.at("src").get<int>();
        edge.dst = rec.at("dst").get<int>();
        edge.relation = rec.at("relation").get<std::string>();
        edge.chains = rec.at("chains").get<std::vector<std::int64_t>>();
        graph.edges.push_back(std::move(edge));
    }
    for (const auto& rec : j.at("chains")) {
        ReasoningChain chain;
        chain.id = rec.at("id").get<std::int64_t>();
        for (int idx : rec.at("nodes").get<std::vector<int>>()) {
            chain.nodes.push_back(graph.nodes.at(idx));
        }
        chain.relations = rec.at("relations").get<std::vector<std::string>>();
        chain.target_item = rec.at("target_item").get<std::string>();
        chain.score = rec.at("score").get<int>();
        auto origin = chain_origin_from_name(rec.at("origin").get<std::string>());
        if (!origin) throw std::runtime_error("unknown chain origin in graph JSON");
        chain.origin = *origin;
        chain.parent_chain = rec.at("parent").get<std::int64_t>();
        chain.degenerate = rec.at("degenerate").get<bool>();
        graph.chains.push_back(std::move(chain));
    }
    return graph;
}

json user_graphs_to_json(const UserGraphs& graphs) {
    return {{"user", graphs.user_id},
            {"observed", graph_to_json(graphs.observed)},
            {"divergent", graph_to_json(graphs.divergent)}};
}

UserGraphs user_graphs_from_json(const json& j) {
    UserGraphs out;
    out.user_id = j.at("user").get<std::string>();
    out.observed = graph_from_json(j.at("observed"));
    out.divergent = graph_from_json(j.at("divergent"));
    return out;
}

namespace {

std::string dot_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

const char* dot_shape(NodeKind kind) {
    switch (kind) {
        case NodeKind::Item: return "box";
        case NodeKind::Attribute: return "ellipse";
        case NodeKind::Concept: return "diamond";
    }
    return "diamond";
}

void emit_graph(std::ostringstream& os, const ReasoningGraph& graph,
                const std::string& prefix, const char* edge_color) {
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& node = graph.nodes[i];
        os << "  " << prefix << i << " [label=\"" << dot_escape(node.label)
           << "\" shape=" << dot_shape(node.kind) << "];\n";
    }
    for (const auto& edge : graph.edges) {
        os << "  " << prefix << edge.src << " -> " << prefix << edge.dst
           << " [label=\"" << dot_escape(edge.relation) << "\" color="
           << edge_color << "];\n";
    }
}

}  // namespace

std::string user_graphs_to_dot(const UserGraphs& graphs) {
    std::ostringstream os;
    os << "digraph \"" << dot_escape(graphs.user_id) << "\" {\n";
    os << "  rankdir=LR;\n";
    emit_graph(os, graphs.observed, "r", "black");
    emit_graph(os, graphs.divergent, "d", "red");
    os << "}\n";
    return os.str();
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return json::parse(is);
}

}  // namespace llmrg
