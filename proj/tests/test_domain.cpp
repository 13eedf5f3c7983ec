#include "doctest.h"

#include "helpers.hpp"
#include "llmrg/domain.hpp"
#include "llmrg/serialize.hpp"

using namespace llmrg;

TEST_CASE("canonicalize_label lowercases and collapses whitespace") {
    CHECK(canonicalize_label("  Star   WARS ") == "star wars");
    CHECK(canonicalize_label("Sci-Fi") == "sci-fi");
    CHECK(canonicalize_label("a\tb\nc") == "a b c");
}

TEST_CASE("canonicalize_label strips surrounding but not interior punctuation") {
    CHECK(canonicalize_label("((Sci-Fi))") == "sci-fi");
    CHECK(canonicalize_label("'spider-man'") == "spider-man");
    CHECK(canonicalize_label("toy story!!!") == "toy story");
}

TEST_CASE("canonicalize_label rejects empty results") {
    CHECK_FALSE(canonicalize_label("").has_value());
    CHECK_FALSE(canonicalize_label("   ").has_value());
    CHECK_FALSE(canonicalize_label("!!!").has_value());
}

TEST_CASE("stable_hash64 is deterministic and seed-sensitive") {
    CHECK(stable_hash64("alpha") == stable_hash64("alpha"));
    CHECK(stable_hash64("alpha") != stable_hash64("beta"));
    CHECK(stable_hash64("alpha", 1) != stable_hash64("alpha", 2));
}

TEST_CASE("catalog enforces unique ids and keeps insertion order") {
    Catalog catalog = testfix::small_catalog();
    CHECK(catalog.size() == 6);
    CHECK(catalog.position("m1") == 0);
    CHECK(catalog.position("m6") == 5);
    CHECK(catalog.position("zz") == -1);
    CHECK(catalog.find("m4")->title == "quiet rivers");
    CHECK(catalog.find("zz") == nullptr);
    CHECK_THROWS_AS(catalog.add({"m1", "dup", {}}), std::invalid_argument);
}

TEST_CASE("chain_signature ignores non-terminal node order") {
    ReasoningChain a = testfix::simple_chain(1, "sci-fi", "space opera", "star voyager", "m1");
    ReasoningChain b = a;
    std::swap(b.nodes[0], b.nodes[1]);  // attr and concept swapped, same target
    CHECK(chain_signature(a) == chain_signature(b));
}

TEST_CASE("chain_signature separates different targets and node sets") {
    ReasoningChain a = testfix::simple_chain(1, "sci-fi", "space opera", "star voyager", "m1");
    ReasoningChain b = a;
    b.target_item = "m2";
    CHECK(chain_signature(a) != chain_signature(b));
    ReasoningChain c = a;
    c.nodes[1].label = "different concept";
    CHECK(chain_signature(a) != chain_signature(c));
}

TEST_CASE("chain_signature requires at least two nodes") {
    ReasoningChain chain;
    chain.nodes.push_back({NodeKind::Item, "solo", "m1"});
    CHECK_THROWS_AS(chain_signature(chain), std::invalid_argument);
}

TEST_CASE("signature hex round trip") {
    Signature sig{0x0123456789abcdefULL, 0xfedcba9876543210ULL};
    auto parsed = Signature::from_hex(sig.hex());
    REQUIRE(parsed.has_value());
    CHECK(*parsed == sig);
    CHECK_FALSE(Signature::from_hex("short").has_value());
    CHECK_FALSE(Signature::from_hex(std::string(32, 'g')).has_value());
}

TEST_CASE("merge_chain unions nodes and deduplicates edges") {
    ReasoningGraph graph;
    ReasoningChain a = testfix::simple_chain(0, "sci-fi", "space opera", "star voyager", "m1");
    ReasoningChain b = testfix::simple_chain(1, "sci-fi", "space opera", "nebula dawn", "m2");
    graph.merge_chain(a);
    graph.merge_chain(b);

    // Shared attr + concept nodes collapse: 3 + 3 - 2 unique nodes.
    CHECK(graph.nodes.size() == 4);
    // attr->concept is shared; the two concept->item edges are distinct.
    CHECK(graph.edges.size() == 3);
    const auto& shared = graph.edges[0];
    CHECK(shared.chains == std::vector<std::int64_t>{0, 1});
    CHECK(graph.chains.size() == 2);

    // Re-merging the identical chain adds no nodes and no new edges.
    graph.merge_chain(a);
    CHECK(graph.nodes.size() == 4);
    CHECK(graph.edges.size() == 3);
}

TEST_CASE("graph json round trip preserves structure") {
    ReasoningGraph graph;
    ReasoningChain a = testfix::simple_chain(0, "sci-fi", "space opera", "star voyager", "m1");
    a.score = 84;
    graph.merge_chain(a);

    ReasoningGraph back = graph_from_json(graph_to_json(graph));
    REQUIRE(back.nodes.size() == graph.nodes.size());
    CHECK(back.nodes[0].label == "sci-fi");
    REQUIRE(back.chains.size() == 1);
    CHECK(back.chains[0].score == 84);
    CHECK(back.chains[0].target_item == "m1");
    CHECK(back.edges.size() == graph.edges.size());
    CHECK(back.node_index == graph.node_index);
}
