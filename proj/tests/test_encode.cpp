#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <set>

#include "helpers.hpp"
#include "llmrg/encode.hpp"

using namespace llmrg;

namespace {

// Two chains sharing the attribute node: 5 unique nodes.
ReasoningGraph five_node_graph() {
    ReasoningGraph graph;
    ReasoningChain a =
        testfix::simple_chain(0, "sci-fi", "space opera", "star voyager", "m1");
    a.score = 90;
    ReasoningChain b = testfix::simple_chain(1, "sci-fi", "alien worlds", "nebula dawn", "m2");
    b.score = 70;
    graph.merge_chain(a);
    graph.merge_chain(b);
    return graph;
}

double encode_scalar(GatedGraphEncoder& enc, const ReasoningGraph& graph, int anchor,
                     int steps, bool backward) {
    ad::Tape tape;
    ad::Var out = encode_graph(tape, enc, graph, anchor, steps);
    ad::Var loss = tape.matmul(out, tape.constant(Mat::Ones(enc.d_g, 1)));
    if (backward) tape.backward(loss);
    return tape.value(loss)(0, 0);
}

}  // namespace

TEST_CASE("node buckets are stable and within range") {
    ChainNode node{NodeKind::Attribute, "sci-fi", ""};
    const int bucket = node_bucket(node);
    CHECK(bucket == node_bucket(node));
    CHECK(bucket >= 0);
    CHECK(bucket < kNodeBuckets);
    CHECK(node_bucket({NodeKind::Concept, "sci-fi", ""}) != bucket);  // kind matters
}

TEST_CASE("adjacency normalizes by out-degree and in-degree") {
    ReasoningGraph graph = five_node_graph();
    // Node 0 (sci-fi) has edges to both concepts.
    AdjacencyPair adj = build_adjacency(graph);
    CHECK(adj.a_out(0, 1) == doctest::Approx(0.5));
    CHECK(adj.a_out(0, 3) == doctest::Approx(0.5));
    CHECK(adj.a_out(1, 2) == doctest::Approx(1.0));
    CHECK(adj.a_in(1, 0) == doctest::Approx(1.0));
    CHECK(adj.a_in(2, 1) == doctest::Approx(1.0));
    // Row sums are 1 for any node with at least one edge in that direction.
    CHECK(adj.a_out.row(0).sum() == doctest::Approx(1.0));
    CHECK(adj.a_in.row(2).sum() == doctest::Approx(1.0));
    CHECK(adj.a_out.row(2).sum() == doctest::Approx(0.0));  // items are sinks
}

TEST_CASE("anchor selection") {
    ReasoningGraph graph = five_node_graph();
    CHECK(observed_anchor(graph, "m2") == 4);  // the node whose item_ref matches
    CHECK(observed_anchor(graph, "zz") == 4);  // fallback: last item node
    CHECK(observed_anchor(ReasoningGraph{}, "m1") == -1);
    // Divergent anchor: terminal node of the highest-scored chain (a, score 90).
    CHECK(divergent_anchor(graph) == 2);
    CHECK(divergent_anchor(ReasoningGraph{}) == -1);
}

TEST_CASE("empty graphs encode to an exact zero vector") {
    GatedGraphEncoder enc;
    enc.init(8, 42);
    ad::Tape tape;
    ad::Var out = encode_graph(tape, enc, ReasoningGraph{}, -1, 2);
    CHECK(tape.value(out).isZero(0.0));
    CHECK(tape.value(out).cols() == 8);
}

TEST_CASE("encoder output is deterministic and anchor-sensitive") {
    GatedGraphEncoder enc;
    enc.init(8, 42);
    ReasoningGraph graph = five_node_graph();
    const double a = encode_scalar(enc, graph, 2, 2, false);
    CHECK(a == encode_scalar(enc, graph, 2, 2, false));
    CHECK(a != encode_scalar(enc, graph, 4, 2, false));
}

TEST_CASE("encoder gradients match central finite differences") {
    GatedGraphEncoder enc;
    enc.init(8, 7);
    ReasoningGraph graph = five_node_graph();
    const int anchor = 2;
    const int steps = 2;
    const double h = 1e-5;

    for (auto& t : enc.tensors("")) t.grad->setZero();
    encode_scalar(enc, graph, anchor, steps, true);

    // Every parameter tensor; for the 16k-row node table only the buckets the
    // graph actually touches can have gradient.
    std::set<int> used;
    for (const auto& node : graph.nodes) used.insert(node_bucket(node));

    for (auto& t : enc.tensors("")) {
        Mat& p = *t.value;
        for (int c = 0; c < p.cols(); ++c) {
            for (int r = 0; r < p.rows(); ++r) {
                if (t.name == "node_table" && !used.count(r)) continue;
                const double keep = p(r, c);
                p(r, c) = keep + h;
                const double up = encode_scalar(enc, graph, anchor, steps, false);
                p(r, c) = keep - h;
                const double down = encode_scalar(enc, graph, anchor, steps, false);
                p(r, c) = keep;
                const double fd = (up - down) / (2 * h);
                const double an = (*t.grad)(r, c);
                const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
                CHECK(std::abs(fd - an) / denom < 1e-4);
            }
        }
    }
    // Untouched table rows must stay at exactly zero gradient.
    for (int r = 0; r < kNodeBuckets && r < 100; ++r) {
        if (!used.count(r)) CHECK(enc.g_node_table.row(r).isZero(0.0));
    }
}

TEST_CASE("checkpoint round trip restores every tensor") {
    GatedGraphEncoder enc;
    enc.init(4, 9);
    const std::string path = "enc_ckpt_test.bin";
    save_tensors(path, enc.tensors("g1."));

    GatedGraphEncoder other;
    other.init(4, 123);  // different init, then overwritten by the load
    CHECK_FALSE(other.w_z.isApprox(enc.w_z));
    load_tensors(path, other.tensors("g1."));
    CHECK(other.w_z.isApprox(enc.w_z, 0.0));
    CHECK(other.node_table.isApprox(enc.node_table, 0.0));

    // Layout mismatches are rejected.
    GatedGraphEncoder wrong;
    wrong.init(8, 9);
    CHECK_THROWS_AS(load_tensors(path, wrong.tensors("g1.")), std::runtime_error);
    CHECK_THROWS_AS(load_tensors(path, enc.tensors("g2.")), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("sgd_step applies the update and clears gradients") {
    GatedGraphEncoder enc;
    enc.init(4, 1);
    auto tensors = enc.tensors("");
    zero_grads(tensors);
    enc.g_w_z.setOnes();
    const Mat before = enc.w_z;
    sgd_step(tensors, 0.5);
    CHECK(enc.w_z.isApprox(before - Mat::Constant(before.rows(), before.cols(), 0.5)));
    CHECK(enc.g_w_z.isZero(0.0));
    CHECK(grads_finite(tensors));
    enc.g_w_z(0, 0) = std::nan("");
    CHECK_FALSE(grads_finite(tensors));
}
