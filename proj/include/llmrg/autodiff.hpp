// Minimal reverse-mode automatic differentiation over dense matrices. A Tape
// records one forward computation; backward() then propagates exact analytic
// gradients in reverse creation order. Parameter leaves reference external
// storage, so embedding tables are never copied per example: gather/scatter
// touch only the rows a computation uses.
//
// Everything here is deterministic given the inputs; tapes are single-use.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace llmrg::ad {

using Mat = Eigen::MatrixXd;

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

class Tape {
public:
    // Leaf referencing external parameter storage; backward accumulates into
    // *grad (which must match value's shape).
    Var param(const Mat* value, Mat* grad);

    // Constant leaf, no gradient.
    Var constant(Mat value);

    // Row lookup into an external table with scatter-add gradients.
    Var gather(const Mat& table, Mat& grad_table, std::vector<int> rows);

    // Elementwise and structural ops
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var cmul(Var a, Var b);              // elementwise product
    Var affine(Var a, double scale, double shift);  // scale*X + shift
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var transpose(Var a);
    Var concat_cols(std::vector<Var> parts);
    Var slice_rows(Var a, int first, int count);
    Var add_broadcast_row(Var m, Var row);  // adds a 1xC row to every row of m

    // Linear algebra
    Var matmul(Var a, Var b);
    Var lmul_const(const Mat& a, Var b);  // a * B with constant a
    // x * table^T where table is external parameter storage (weight tying).
    Var matmul_nt(Var x, const Mat& table, Mat& grad_table);

    // Row-wise nonlinear blocks
    Var softmax_rows(Var logits);                   // each row independently
    Var softmax_rows_masked(Var logits, Mat mask);  // mask added pre-softmax
    Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-6);

    // Scalar (1x1) cross-entropy of a single 1xN logit row against target.
    Var softmax_cross_entropy(Var logits, int target);

    const Mat& value(Var v) const;
    const Mat& grad(Var v) const;

    // Seeds root's gradient (ones by default) and runs the reverse sweep.
    void backward(Var root);
    void backward(Var root, Mat seed);

private:
    struct Node {
        Mat value;
        const Mat* external = nullptr;  // set for param leaves
        Mat grad;
        std::function<void(Tape&)> backprop;
    };

    const Mat& val(int id) const {
        const Node& n = nodes_[id];
        return n.external ? *n.external : n.value;
    }
    Mat& grad_buf(int id);
    Var push(Mat value, std::function<void(Tape&)> backprop);

    std::vector<Node> nodes_;
};

}  // namespace llmrg::ad
