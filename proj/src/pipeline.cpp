#include "llmrg/pipeline.hpp"

#include <set>
#include <stdexcept>

#include "llmrg/serialize.hpp"

namespace llmrg {

KnowledgeTable derive_knowledge_table(const Catalog& catalog) {
    KnowledgeTable table;
    for (const auto& item : catalog.items) {
        for (const auto& attr : item.attributes) {
            table[attr].items.push_back(item.title);
        }
    }
    for (auto& [attr, entry] : table) {
        entry.concepts = {"drawn to " + attr, "a taste for " + attr,
                          "keeps returning to " + attr};
    }
    return table;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& backend_config,
                                      const PipelineConfig& pipeline_config,
                                      const Catalog& catalog) {
    if (backend_config.kind == BackendKind::Http) {
        return std::make_unique<HttpBackend>(backend_config);
    }
    MockOracleConfig mock;
    mock.table = derive_knowledge_table(catalog);
    mock.fidelity = pipeline_config.mock_fidelity;
    mock.seed = pipeline_config.seed;
    return std::make_unique<MockBackend>(std::move(mock));
}

std::vector<std::string> graph_context(const LeaveOneOutSplit::UserSplit& user) {
    if (user.input.size() < 2) return {};
    return {user.input.begin(), user.input.end() - 1};
}

UserGraphBuild build_user_graphs(const LeaveOneOutSplit::UserSplit& user,
                                 ReasonDeps& reason_deps, DivergeDeps& diverge_deps,
                                 const PipelineConfig& config) {
    UserGraphBuild out;
    out.graphs.user_id = user.user_id;

    InteractionSequence context;
    context.user_id = user.user_id;
    context.events = graph_context(user);
    context.attributes = user.attributes;
    if (context.events.empty()) return out;

    BuildResult observed = build_reasoning_graph(context, reason_deps, config);
    out.graphs.observed = std::move(observed.graph);
    out.rejected = std::move(observed.rejected);

    std::set<std::string> consumed(user.full_prefix.begin(), user.full_prefix.end());
    DivergeResult divergent = build_divergent_graph(out.graphs.observed, consumed,
                                                    diverge_deps, config,
                                                    observed.next_chain_id);
    out.graphs.divergent = std::move(divergent.graph);
    out.rejected.insert(out.rejected.end(), divergent.rejected.begin(),
                        divergent.rejected.end());
    return out;
}

GraphBuildResult build_all_graphs(const Catalog& catalog, const LeaveOneOutSplit& split,
                                  const PipelineConfig& config, Backend& backend,
                                  KnowledgeBase& kbase) {
    IdfTable idf = IdfTable::build(catalog);
    TitleIndex title_index(catalog, idf);
    ReasonDeps reason_deps{backend, kbase, idf, catalog};
    DivergeDeps diverge_deps{backend, idf, title_index, catalog};

    GraphBuildResult result;
    for (const auto& user : split.users) {
        UserGraphBuild build = build_user_graphs(user, reason_deps, diverge_deps, config);
        result.rejected_chains += build.rejected.size();
        result.graphs.emplace(user.user_id, std::move(build.graphs));
    }
    result.cache = kbase.stats();
    return result;
}

void write_graphs_file(const std::string& path,
                       const std::map<std::string, UserGraphs>& graphs) {
    nlohmann::json doc;
    doc["users"] = nlohmann::json::array();
    for (const auto& [user_id, ug] : graphs) {
        doc["users"].push_back(user_graphs_to_json(ug));
    }
    write_json_file(path, doc);
}

std::map<std::string, UserGraphs> read_graphs_file(const std::string& path) {
    nlohmann::json doc = read_json_file(path);
    std::map<std::string, UserGraphs> graphs;
    for (const auto& entry : doc.at("users")) {
        UserGraphs ug = user_graphs_from_json(entry);
        std::string id = ug.user_id;
        graphs.emplace(std::move(id), std::move(ug));
    }
    return graphs;
}

}  // namespace llmrg
