#include "llmrg/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace llmrg {

namespace {

void fill_normal(Mat& m, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    }
}

}  // namespace

void BaseRecommender::init(int n_items, int d, std::size_t len, std::uint64_t seed) {
    d_b = d;
    max_len = len;
    std::mt19937_64 rng(seed);
    const double sc = 1.0 / std::sqrt(static_cast<double>(d));

    auto mat = [&](Eigen::Index r, Eigen::Index c, double scale) {
        Mat m(r, c);
        fill_normal(m, rng, scale);
        return m;
    };
    item_table = mat(n_items, d, 0.1);
    pos_table = mat(static_cast<Eigen::Index>(len), d, 0.1);
    w_q = mat(d, d, sc);
    w_k = mat(d, d, sc);
    w_v = mat(d, d, sc);
    w_ao = mat(d, d, sc);
    ln1_gain = Mat::Ones(1, d);
    ln1_bias = Mat::Zero(1, d);
    w_f1 = mat(d, d, sc);
    w_f2 = mat(d, d, sc);
    b_f1 = Mat::Zero(1, d);
    b_f2 = Mat::Zero(1, d);
    ln2_gain = Mat::Ones(1, d);
    ln2_bias = Mat::Zero(1, d);

    for (auto& t : tensors("")) {
        *t.grad = Mat::Zero(t.value->rows(), t.value->cols());
    }
}

std::vector<TensorRef> BaseRecommender::tensors(const std::string& prefix) {
    return {
        {prefix + "item_table", &item_table, &g_item_table},
        {prefix + "pos_table", &pos_table, &g_pos_table},
        {prefix + "w_q", &w_q, &g_w_q},
        {prefix + "w_k", &w_k, &g_w_k},
        {prefix + "w_v", &w_v, &g_w_v},
        {prefix + "w_ao", &w_ao, &g_w_ao},
        {prefix + "ln1_gain", &ln1_gain, &g_ln1_gain},
        {prefix + "ln1_bias", &ln1_bias, &g_ln1_bias},
        {prefix + "w_f1", &w_f1, &g_w_f1},
        {prefix + "w_f2", &w_f2, &g_w_f2},
        {prefix + "b_f1", &b_f1, &g_b_f1},
        {prefix + "b_f2", &b_f2, &g_b_f2},
        {prefix + "ln2_gain", &ln2_gain, &g_ln2_gain},
        {prefix + "ln2_bias", &ln2_bias, &g_ln2_bias},
    };
}

void FusionHead::init(int d_g, int d_b, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    w_f = Mat(2 * d_g + d_b, d_b);
    fill_normal(w_f, rng, 1.0 / std::sqrt(static_cast<double>(2 * d_g + d_b)));
    b_f = Mat::Zero(1, d_b);
    g_w_f = Mat::Zero(w_f.rows(), w_f.cols());
    g_b_f = Mat::Zero(1, d_b);
}

std::vector<TensorRef> FusionHead::tensors(const std::string& prefix) {
    return {{prefix + "w_f", &w_f, &g_w_f}, {prefix + "b_f", &b_f, &g_b_f}};
}

void RecModel::init(const PipelineConfig& config, int n_items) {
    // Distinct derived seeds so the components do not share an init stream.
    g1.init(config.d_g, config.seed * 6364136223846793005ULL + 1);
    g2.init(config.d_g, config.seed * 6364136223846793005ULL + 2);
    base.init(n_items, config.d_b, config.l_tru, config.seed * 6364136223846793005ULL + 3);
    fusion.init(config.d_g, config.d_b, config.seed * 6364136223846793005ULL + 4);
    propagation_steps = config.propagation_steps;
}

std::vector<TensorRef> RecModel::tensors() {
    std::vector<TensorRef> all = g1.tensors("g1.");
    for (auto& t : g2.tensors("g2.")) all.push_back(t);
    for (auto& t : base.tensors("base.")) all.push_back(t);
    for (auto& t : fusion.tensors("fusion.")) all.push_back(t);
    return all;
}

ad::Var base_forward(ad::Tape& tape, BaseRecommender& base,
                     const std::vector<int>& input_positions) {
    if (input_positions.empty()) {
        return tape.constant(Mat::Zero(1, base.d_b));
    }
    const int len = static_cast<int>(input_positions.size());
    if (static_cast<std::size_t>(len) > base.max_len) {
        throw std::invalid_argument("input longer than max_len");
    }

    std::vector<int> pos_rows(len);
    std::iota(pos_rows.begin(), pos_rows.end(), 0);
    ad::Var x = tape.add(tape.gather(base.item_table, base.g_item_table, input_positions),
                         tape.gather(base.pos_table, base.g_pos_table, pos_rows));

    ad::Var w_q = tape.param(&base.w_q, &base.g_w_q);
    ad::Var w_k = tape.param(&base.w_k, &base.g_w_k);
    ad::Var w_v = tape.param(&base.w_v, &base.g_w_v);
    ad::Var q = tape.matmul(x, w_q);
    ad::Var k = tape.matmul(x, w_k);
    ad::Var v = tape.matmul(x, w_v);

    Mat mask = Mat::Zero(len, len);
    for (int i = 0; i < len; ++i) {
        for (int j = i + 1; j < len; ++j) mask(i, j) = -1e9;
    }
    ad::Var scores = tape.affine(tape.matmul(q, tape.transpose(k)),
                                 1.0 / std::sqrt(static_cast<double>(base.d_b)), 0.0);
    ad::Var alpha = tape.softmax_rows_masked(scores, mask);
    ad::Var attended = tape.matmul(tape.matmul(alpha, v),
                                   tape.param(&base.w_ao, &base.g_w_ao));

    ad::Var h1 = tape.layer_norm_rows(tape.add(x, attended),
                                      tape.param(&base.ln1_gain, &base.g_ln1_gain),
                                      tape.param(&base.ln1_bias, &base.g_ln1_bias));
    ad::Var ff = tape.add_broadcast_row(
        tape.matmul(
            tape.tanh(tape.add_broadcast_row(
                tape.matmul(h1, tape.param(&base.w_f1, &base.g_w_f1)),
                tape.param(&base.b_f1, &base.g_b_f1))),
            tape.param(&base.w_f2, &base.g_w_f2)),
        tape.param(&base.b_f2, &base.g_b_f2));
    ad::Var h2 = tape.layer_norm_rows(tape.add(h1, ff),
                                      tape.param(&base.ln2_gain, &base.g_ln2_gain),
                                      tape.param(&base.ln2_bias, &base.g_ln2_bias));
    return tape.slice_rows(h2, len - 1, 1);
}

ad::Var forward_logits(ad::Tape& tape, RecModel& model, const RecExample& example) {
    ad::Var e_ori = tape.constant(Mat::Zero(1, model.g1.d_g));
    ad::Var e_div = tape.constant(Mat::Zero(1, model.g2.d_g));
    if (model.mode != FusionMode::BaseOnly && example.graphs) {
        const int anchor = observed_anchor(example.graphs->observed, example.anchor_item);
        e_ori = encode_graph(tape, model.g1, example.graphs->observed, anchor,
                             model.propagation_steps);
        if (model.mode != FusionMode::NoDivergent) {
            e_div = encode_graph(tape, model.g2, example.graphs->divergent,
                                 divergent_anchor(example.graphs->divergent),
                                 model.propagation_steps);
        }
    }
    ad::Var e_base = base_forward(tape, model.base, example.input_positions);

    ad::Var fused = tape.tanh(tape.add_broadcast_row(
        tape.matmul(tape.concat_cols({e_ori, e_div, e_base}),
                    tape.param(&model.fusion.w_f, &model.fusion.g_w_f)),
        tape.param(&model.fusion.b_f, &model.fusion.g_b_f)));
    return tape.matmul_nt(fused, model.base.item_table, model.base.g_item_table);
}

TrainStats train(RecModel& model, const std::vector<RecExample>& examples,
                 const TrainOptions& options) {
    TrainStats stats;
    stats.examples = examples.size();
    auto params = model.tensors();
    zero_grads(params);

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(static_cast<std::uint32_t>(options.seed));

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const RecExample& ex = examples[idx];
            ad::Tape tape;
            ad::Var logits = forward_logits(tape, model, ex);
            ad::Var loss = tape.softmax_cross_entropy(logits, ex.target_position);
            loss_sum += tape.value(loss)(0, 0);
            tape.backward(loss);
            if (!grads_finite(params)) {
                throw std::runtime_error("non-finite gradient during training");
            }
            sgd_step(params, options.learning_rate);
        }
        stats.epoch_mean_loss.push_back(examples.empty() ? 0.0
                                                         : loss_sum / examples.size());
    }
    return stats;
}

std::vector<double> score_all(RecModel& model, const RecExample& example) {
    ad::Tape tape;
    ad::Var logits = forward_logits(tape, model, example);
    const Mat& row = tape.value(logits);
    return {row.data(), row.data() + row.size()};
}

std::vector<int> top_n_positions(const std::vector<double>& scores, const Catalog& catalog,
                                 int n) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return catalog.items[a].id < catalog.items[b].id;
    });
    if (static_cast<int>(order.size()) > n) order.resize(n);
    return order;
}

}  // namespace llmrg
