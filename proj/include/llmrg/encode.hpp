// Gated-graph encoders g1/g2. Node features come from a fixed-size hashed
// embedding table (bucket = stable_hash64 of the node identity key), messages
// flow along in/out normalized adjacency, and a GRU-style update runs for T
// propagation steps. Readout is additive attention against an anchor node.
//
// Both the observed and divergent graphs use the same architecture; they just
// carry independent parameters and anchors.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llmrg/autodiff.hpp"
#include "llmrg/domain.hpp"

namespace llmrg {

using ad::Mat;

// Named view onto one parameter tensor and its gradient accumulator. The
// checkpoint format and the SGD loop both operate on lists of these.
struct TensorRef {
    std::string name;
    Mat* value = nullptr;
    Mat* grad = nullptr;
};

// Flat binary checkpoint with a JSON header (names, shapes, dtype f64).
// Loading requires the exact name/shape layout it was saved with.
void save_tensors(const std::string& path, const std::vector<TensorRef>& tensors);
void load_tensors(const std::string& path, const std::vector<TensorRef>& tensors);

// SGD step over a tensor list: value -= lr * grad, then grad = 0.
void sgd_step(const std::vector<TensorRef>& tensors, double lr);
void zero_grads(const std::vector<TensorRef>& tensors);
bool grads_finite(const std::vector<TensorRef>& tensors);

// ---------------------------------------------------------------------------

inline constexpr int kNodeBuckets = 1 << 14;

// Stable feature bucket for a node; independent of the training seed so
// checkpoints stay meaningful across runs.
int node_bucket(const ChainNode& node);

struct AdjacencyPair {
    Mat a_in;   // a_in(i,j)  = 1/indeg(i)  for each edge j -> i
    Mat a_out;  // a_out(i,j) = 1/outdeg(i) for each edge i -> j
};

AdjacencyPair build_adjacency(const ReasoningGraph& graph);

struct GatedGraphEncoder {
    int d_g = 0;

    Mat node_table;                 // kNodeBuckets x d_g
    Mat w_in, w_out;                // d_g x d_g message projections
    Mat b_in, b_out;                // 1 x d_g
    Mat w_z, w_r, w_h;              // 2*d_g x d_g gate inputs from messages
    Mat u_z, u_r, u_h;              // d_g x d_g gate inputs from state
    Mat b_z, b_r, b_h;              // 1 x d_g
    Mat w_att_node, w_att_anchor;   // d_g x d_g additive attention
    Mat b_att;                      // 1 x d_g
    Mat v_att;                      // d_g x 1
    Mat w_ro;                       // 2*d_g x d_g readout projection
    Mat b_ro;                       // 1 x d_g

    // Gradient accumulators, same shapes as the fields above.
    Mat g_node_table, g_w_in, g_w_out, g_b_in, g_b_out;
    Mat g_w_z, g_w_r, g_w_h, g_u_z, g_u_r, g_u_h, g_b_z, g_b_r, g_b_h;
    Mat g_w_att_node, g_w_att_anchor, g_b_att, g_v_att, g_w_ro, g_b_ro;

    void init(int d_g, std::uint64_t seed);

    // Named value/grad pairs, prefixed so encoder and recommender tensors can
    // share one checkpoint.
    std::vector<TensorRef> tensors(const std::string& prefix);
};

// Anchor selection. -1 means no usable anchor (empty graph).
int observed_anchor(const ReasoningGraph& graph, const std::string& last_item_id);
int divergent_anchor(const DivergentGraph& graph);

// Records the full forward pass on the tape and returns the 1 x d_g graph
// embedding. An empty graph (or anchor < 0) yields a constant zero vector so
// downstream fusion still differentiates.
ad::Var encode_graph(ad::Tape& tape, GatedGraphEncoder& enc, const ReasoningGraph& graph,
                     int anchor, int steps);

}  // namespace llmrg
