#include "llmrg/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace llmrg::ad {

Var Tape::push(Mat value, std::function<void(Tape&)> backprop) {
    Node node;
    node.value = std::move(value);
    node.backprop = std::move(backprop);
    nodes_.push_back(std::move(node));
    return {static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_buf(int id) {
    Node& node = nodes_[id];
    if (node.grad.size() == 0) {
        node.grad = Mat::Zero(val(id).rows(), val(id).cols());
    }
    return node.grad;
}

const Mat& Tape::value(Var v) const { return val(v.id); }

const Mat& Tape::grad(Var v) const { return nodes_[v.id].grad; }

Var Tape::param(const Mat* value, Mat* grad) {
    Node node;
    node.external = value;
    nodes_.push_back(std::move(node));
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[id].backprop = [id, grad](Tape& t) {
        if (grad) *grad += t.nodes_[id].grad;
    };
    return {id};
}

Var Tape::constant(Mat value) { return push(std::move(value), {}); }

Var Tape::gather(const Mat& table, Mat& grad_table, std::vector<int> rows) {
    Mat out(static_cast<int>(rows.size()), table.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = table.row(rows[i]);
    auto idx = std::move(rows);
    Var v = push(std::move(out), {});
    const int id = v.id;
    nodes_[id].backprop = [id, idx, &grad_table](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            grad_table.row(idx[i]) += g.row(i);
        }
    };
    return v;
}

Var Tape::add(Var a, Var b) {
    Var v = push(val(a.id) + val(b.id), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a, b](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        t.grad_buf(a.id) += g;
        t.grad_buf(b.id) += g;
    };
    return v;
}

Var Tape::sub(Var a, Var b) {
    Var v = push(val(a.id) - val(b.id), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a, b](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        t.grad_buf(a.id) += g;
        t.grad_buf(b.id) -= g;
    };
    return v;
}

Var Tape::cmul(Var a, Var b) {
    Var v = push(val(a.id).cwiseProduct(val(b.id)), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a, b](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        t.grad_buf(a.id) += g.cwiseProduct(t.val(b.id));
        t.grad_buf(b.id) += g.cwiseProduct(t.val(a.id));
    };
    return v;
}

Var Tape::affine(Var a, double scale, double shift) {
    Var v = push((val(a.id).array() * scale + shift).matrix(), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a, scale](Tape& t) {
        t.grad_buf(a.id) += t.nodes_[id].grad * scale;
    };
    return v;
}

Var Tape::tanh(Var a) {
    Var v = push(val(a.id).array().tanh().matrix(), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a](Tape& t) {
        const Mat& y = t.val(id);
        t.grad_buf(a.id) +=
            t.nodes_[id].grad.cwiseProduct((1.0 - y.array().square()).matrix());
    };
    return v;
}

Var Tape::sigmoid(Var a) {
    Var v = push((1.0 / (1.0 + (-val(a.id).array()).exp())).matrix(), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a](Tape& t) {
        const Mat& y = t.val(id);
        t.grad_buf(a.id) +=
            t.nodes_[id].grad.cwiseProduct((y.array() * (1.0 - y.array())).matrix());
    };
    return v;
}

Var Tape::transpose(Var a) {
    Var v = push(val(a.id).transpose(), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a](Tape& t) {
        t.grad_buf(a.id) += t.nodes_[id].grad.transpose();
    };
    return v;
}

Var Tape::concat_cols(std::vector<Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols needs parts");
    const auto rows = val(parts[0].id).rows();
    Eigen::Index cols = 0;
    for (Var p : parts) cols += val(p.id).cols();
    Mat out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
        out.middleCols(at, val(p.id).cols()) = val(p.id);
        at += val(p.id).cols();
    }
    Var v = push(std::move(out), {});
    const int id = v.id;
    nodes_[id].backprop = [id, parts](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        Eigen::Index at = 0;
        for (Var p : parts) {
            const Eigen::Index w = t.val(p.id).cols();
            t.grad_buf(p.id) += g.middleCols(at, w);
            at += w;
        }
    };
    return v;
}

Var Tape::slice_rows(Var a, int first, int count) {
    Var v = push(val(a.id).middleRows(first, count), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a, first, count](Tape& t) {
        t.grad_buf(a.id).middleRows(first, count) += t.nodes_[id].grad;
    };
    return v;
}

Var Tape::add_broadcast_row(Var m, Var row) {
    Var v = push(val(m.id).rowwise() + val(row.id).row(0), {});
    const int id = v.id;
    nodes_[id].backprop = [id, m, row](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        t.grad_buf(m.id) += g;
        t.grad_buf(row.id) += g.colwise().sum();
    };
    return v;
}

Var Tape::matmul(Var a, Var b) {
    Var v = push(val(a.id) * val(b.id), {});
    const int id = v.id;
    nodes_[id].backprop = [id, a, b](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        t.grad_buf(a.id) += g * t.val(b.id).transpose();
        t.grad_buf(b.id) += t.val(a.id).transpose() * g;
    };
    return v;
}

Var Tape::lmul_const(const Mat& a, Var b) {
    Var v = push(a * val(b.id), {});
    const int id = v.id;
    Mat at = a.transpose();
    nodes_[id].backprop = [id, b, at](Tape& t) {
        t.grad_buf(b.id) += at * t.nodes_[id].grad;
    };
    return v;
}

Var Tape::matmul_nt(Var x, const Mat& table, Mat& grad_table) {
    Var v = push(val(x.id) * table.transpose(), {});
    const int id = v.id;
    nodes_[id].backprop = [id, x, &table, &grad_table](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        t.grad_buf(x.id) += g * table;
        grad_table += g.transpose() * t.val(x.id);
    };
    return v;
}

namespace {

Mat row_softmax(const Mat& logits) {
    Mat out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

}  // namespace

Var Tape::softmax_rows(Var logits) {
    Var v = push(row_softmax(val(logits.id)), {});
    const int id = v.id;
    nodes_[id].backprop = [id, logits](Tape& t) {
        const Mat& y = t.val(id);
        const Mat& g = t.nodes_[id].grad;
        Mat& gl = t.grad_buf(logits.id);
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            const double dot = g.row(r).dot(y.row(r));
            gl.row(r) += (y.row(r).array() * (g.row(r).array() - dot)).matrix();
        }
    };
    return v;
}

Var Tape::softmax_rows_masked(Var logits, Mat mask) {
    Var shifted = push(val(logits.id) + mask, {});
    const int sid = shifted.id;
    nodes_[sid].backprop = [sid, logits](Tape& t) {
        t.grad_buf(logits.id) += t.nodes_[sid].grad;
    };
    return softmax_rows(shifted);
}

Var Tape::layer_norm_rows(Var x, Var gain, Var bias, double eps) {
    const Mat& xv = val(x.id);
    const Eigen::Index cols = xv.cols();
    Mat xhat(xv.rows(), cols);
    Eigen::VectorXd inv_std(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        const double mean = xv.row(r).mean();
        const double var = (xv.row(r).array() - mean).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = ((xv.row(r).array() - mean) * inv_std(r)).matrix();
    }
    Mat out = (xhat.array().rowwise() * val(gain.id).row(0).array()).matrix();
    out = out.rowwise() + val(bias.id).row(0);

    Var v = push(std::move(out), {});
    const int id = v.id;
    nodes_[id].backprop = [id, x, gain, bias, xhat, inv_std](Tape& t) {
        const Mat& g = t.nodes_[id].grad;
        const Mat& gn = t.val(gain.id);
        Mat& gx = t.grad_buf(x.id);
        Mat& gg = t.grad_buf(gain.id);
        Mat& gb = t.grad_buf(bias.id);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            Eigen::ArrayXd dxhat = g.row(r).array() * gn.row(0).array();
            const double mean_dxhat = dxhat.mean();
            const double mean_dxhat_xhat = (dxhat * xhat.row(r).transpose().array()).mean();
            gx.row(r) += (inv_std(r) *
                          (dxhat - mean_dxhat - xhat.row(r).transpose().array() * mean_dxhat_xhat))
                             .matrix()
                             .transpose();
            gg.row(0) += (g.row(r).array() * xhat.row(r).array()).matrix();
            gb.row(0) += g.row(r);
        }
    };
    return v;
}

Var Tape::softmax_cross_entropy(Var logits, int target) {
    const Mat& lv = val(logits.id);
    if (lv.rows() != 1) throw std::invalid_argument("cross entropy expects a 1xN row");
    Mat probs = row_softmax(lv);
    Mat loss(1, 1);
    loss(0, 0) = -std::log(std::max(probs(0, target), 1e-300));
    Var v = push(std::move(loss), {});
    const int id = v.id;
    nodes_[id].backprop = [id, logits, probs, target](Tape& t) {
        const double g = t.nodes_[id].grad(0, 0);
        Mat delta = probs;
        delta(0, target) -= 1.0;
        t.grad_buf(logits.id) += g * delta;
    };
    return v;
}

void Tape::backward(Var root) {
    backward(root, Mat::Ones(val(root.id).rows(), val(root.id).cols()));
}

void Tape::backward(Var root, Mat seed) {
    grad_buf(root.id) = std::move(seed);
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
        Node& node = nodes_[id];
        if (node.grad.size() == 0 || !node.backprop) continue;
        node.backprop(*this);
    }
}

}  // namespace llmrg::ad
