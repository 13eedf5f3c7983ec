// End-to-end wiring: backend construction, per-user graph building (phi), and
// the artifacts the CLI persists between stages.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "llmrg/config.hpp"
#include "llmrg/diverge.hpp"
#include "llmrg/domain.hpp"
#include "llmrg/ingest.hpp"
#include "llmrg/kbase.hpp"
#include "llmrg/llm.hpp"
#include "llmrg/mock_oracle.hpp"
#include "llmrg/reason.hpp"

namespace llmrg {

// Knowledge table for the mock backend, derived deterministically from the
// catalog: per attribute, the titles carrying it plus a small synthesized
// concept vocabulary.
KnowledgeTable derive_knowledge_table(const Catalog& catalog);

std::unique_ptr<Backend> make_backend(const BackendConfig& backend_config,
                                      const PipelineConfig& pipeline_config,
                                      const Catalog& catalog);

// Graph context for one user: the split input minus its last event, so the
// training target never appears in the graphs the model trains against.
std::vector<std::string> graph_context(const LeaveOneOutSplit::UserSplit& user);

struct UserGraphBuild {
    UserGraphs graphs;
    std::vector<RejectedChain> rejected;
};

UserGraphBuild build_user_graphs(const LeaveOneOutSplit::UserSplit& user,
                                 ReasonDeps& reason_deps, DivergeDeps& diverge_deps,
                                 const PipelineConfig& config);

struct GraphBuildResult {
    std::map<std::string, UserGraphs> graphs;
    std::size_t rejected_chains = 0;
    CacheTelemetry cache;
};

// Builds graphs for every split user in order, sharing one knowledge base.
GraphBuildResult build_all_graphs(const Catalog& catalog, const LeaveOneOutSplit& split,
                                  const PipelineConfig& config, Backend& backend,
                                  KnowledgeBase& kbase);

// Persistence of the per-user graph map as one JSON document.
void write_graphs_file(const std::string& path,
                       const std::map<std::string, UserGraphs>& graphs);
std::map<std::string, UserGraphs> read_graphs_file(const std::string& path);

}  // namespace llmrg
