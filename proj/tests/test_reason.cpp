#include "doctest.h"

#include "helpers.hpp"
#include "llmrg/mock_oracle.hpp"
#include "llmrg/pipeline.hpp"
#include "llmrg/reason.hpp"

using namespace llmrg;

namespace {

struct ReasonRig {
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    MockBackend backend{{testfix::small_table(), 1.0, 1}};
    KnowledgeBase kbase{1000};
    PipelineConfig config;

    ReasonDeps deps() { return {backend, kbase, idf, catalog}; }
};

struct FailingBackend : Backend {
    std::string complete(const Prompt&) override { throw BackendError("down"); }
};

InteractionSequence seq(std::string user, std::vector<std::string> events) {
    InteractionSequence s;
    s.user_id = std::move(user);
    s.events = std::move(events);
    s.attributes = {"sci-fi"};
    return s;
}

}  // namespace

TEST_CASE("context_signature separates attributes and items") {
    CHECK(context_signature("sci-fi", "m1") == context_signature("sci-fi", "m1"));
    CHECK(context_signature("sci-fi", "m1") != context_signature("sci-fi", "m2"));
    CHECK(context_signature("sci-fi", "m1") != context_signature("drama", "m1"));
}

TEST_CASE("build_reasoning_graph verifies and merges one chain per attribute") {
    ReasonRig rig;
    ReasonDeps deps = rig.deps();
    BuildResult result = build_reasoning_graph(seq("u1", {"m1", "m2"}), deps, rig.config);

    REQUIRE(result.graph.chains.size() == 2);
    for (const auto& chain : result.graph.chains) {
        CHECK(chain.score == 100);  // perfect-fidelity oracle
        CHECK_FALSE(chain.degenerate);
        CHECK(chain.origin == ChainOrigin::Observed);
    }
    CHECK(result.graph.chains[0].target_item == "m1");
    CHECK(result.graph.chains[1].target_item == "m2");
    CHECK(result.rejected.empty());
    // Shared attribute node: (attr, concept, item) x2 minus the shared attr.
    CHECK(result.graph.nodes.size() == 5);
    CHECK(result.next_chain_id == 2);
    CHECK(rig.kbase.size() > 0);
}

TEST_CASE("second chain links to the existing chain on the same attribute") {
    ReasonRig rig;
    ReasonDeps deps = rig.deps();
    BuildResult result = build_reasoning_graph(seq("u1", {"m1", "m2"}), deps, rig.config);
    REQUIRE(result.graph.chains.size() == 2);
    CHECK(result.graph.chains[0].parent_chain == -1);
    CHECK(result.graph.chains[1].parent_chain == result.graph.chains[0].id);
}

TEST_CASE("repeat contexts are served from the cache with zero backend calls") {
    ReasonRig rig;
    ReasonDeps deps = rig.deps();
    build_reasoning_graph(seq("u1", {"m1", "m2"}), deps, rig.config);
    const std::uint64_t calls_before = rig.backend.counters().logical.load();

    BuildResult second = build_reasoning_graph(seq("u2", {"m1", "m2"}), deps, rig.config);
    CHECK(rig.backend.counters().logical.load() == calls_before);
    REQUIRE(second.graph.chains.size() == 2);
    for (const auto& chain : second.graph.chains) {
        CHECK(chain.origin == ChainOrigin::Cached);
        CHECK(chain.score == 100);
    }
}

TEST_CASE("cached chains get fresh local ids") {
    ReasonRig rig;
    ReasonDeps deps = rig.deps();
    build_reasoning_graph(seq("u1", {"m1", "m2"}), deps, rig.config);
    BuildResult second = build_reasoning_graph(seq("u2", {"m2", "m1"}), deps, rig.config);
    REQUIRE(second.graph.chains.size() == 2);
    CHECK(second.graph.chains[0].id == 0);
    CHECK(second.graph.chains[1].id == 1);
    CHECK(second.graph.chains[0].parent_chain == -1);  // stale links are cleared
}

TEST_CASE("backend failure degrades to a degenerate fallback chain") {
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    FailingBackend backend;
    KnowledgeBase kbase(100);
    PipelineConfig config;
    ReasonDeps deps{backend, kbase, idf, catalog};

    BuildResult result = build_reasoning_graph(seq("u1", {"m1"}), deps, config);
    REQUIRE(result.graph.chains.size() == 1);
    const ReasoningChain& chain = result.graph.chains[0];
    CHECK(chain.degenerate);
    CHECK(chain.score == 0);
    CHECK(chain.nodes.back().item_ref == "m1");
    CHECK(kbase.size() == 0);  // fallbacks never enter the cache
}

TEST_CASE("sequences longer than l_tru only reason over the suffix") {
    ReasonRig rig;
    rig.config.l_tru = 2;
    ReasonDeps deps = rig.deps();
    BuildResult result =
        build_reasoning_graph(seq("u1", {"m4", "m5", "m1", "m2"}), deps, rig.config);
    REQUIRE(result.graph.chains.size() == 2);
    CHECK(result.graph.chains[0].target_item == "m1");
    CHECK(result.graph.chains[1].target_item == "m2");
}

TEST_CASE("tau above every score rejects chains and keeps only fallbacks") {
    ReasonRig rig;
    rig.config.tau = 100;
    // Fidelity 0: every abductive fill is a decoy, so no chain can reach 100.
    MockBackend lying({testfix::small_table(), 0.0, 1});
    ReasonDeps deps{lying, rig.kbase, rig.idf, rig.catalog};

    BuildResult result = build_reasoning_graph(seq("u1", {"m1", "m2"}), deps, rig.config);
    REQUIRE(result.graph.chains.size() == 2);
    for (const auto& chain : result.graph.chains) {
        CHECK(chain.degenerate);
        CHECK(chain.score == 0);
    }
    CHECK_FALSE(result.rejected.empty());
    CHECK(rig.kbase.size() == 0);
}
