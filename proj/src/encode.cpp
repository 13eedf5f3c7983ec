#include "llmrg/encode.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace llmrg {

void save_tensors(const std::string& path, const std::vector<TensorRef>& tensors) {
    nlohmann::json header;
    header["dtype"] = "f64";
    header["tensors"] = nlohmann::json::array();
    for (const auto& t : tensors) {
        header["tensors"].push_back({{"name", t.name},
                                     {"rows", t.value->rows()},
                                     {"cols", t.value->cols()}});
    }
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const std::uint64_t len = head.size();
    out.write("LRGT", 4);
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& t : tensors) {
        out.write(reinterpret_cast<const char*>(t.value->data()),
                  static_cast<std::streamsize>(t.value->size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

void load_tensors(const std::string& path, const std::vector<TensorRef>& tensors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    char magic[4];
    std::uint64_t len = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || std::string(magic, 4) != "LRGT") {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    std::string head(len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(len));
    nlohmann::json header = nlohmann::json::parse(head);
    const auto& listed = header.at("tensors");
    if (listed.size() != tensors.size()) {
        throw std::runtime_error("checkpoint tensor count mismatch: " + path);
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& meta = listed[i];
        if (meta.at("name").get<std::string>() != tensors[i].name ||
            meta.at("rows").get<Eigen::Index>() != tensors[i].value->rows() ||
            meta.at("cols").get<Eigen::Index>() != tensors[i].value->cols()) {
            throw std::runtime_error("checkpoint layout mismatch at " + tensors[i].name);
        }
        in.read(reinterpret_cast<char*>(tensors[i].value->data()),
                static_cast<std::streamsize>(tensors[i].value->size() * sizeof(double)));
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
}

void sgd_step(const std::vector<TensorRef>& tensors, double lr) {
    for (const auto& t : tensors) {
        *t.value -= lr * *t.grad;
        t.grad->setZero();
    }
}

void zero_grads(const std::vector<TensorRef>& tensors) {
    for (const auto& t : tensors) t.grad->setZero();
}

bool grads_finite(const std::vector<TensorRef>& tensors) {
    for (const auto& t : tensors) {
        if (!t.grad->allFinite()) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::uint64_t kFeatureSeed = 0x6c6c6d7267666561ULL;  // fixed, not cfg.seed
}

int node_bucket(const ChainNode& node) {
    return static_cast<int>(stable_hash64(node.identity_key(), kFeatureSeed) % kNodeBuckets);
}

AdjacencyPair build_adjacency(const ReasoningGraph& graph) {
    const int n = static_cast<int>(graph.nodes.size());
    AdjacencyPair adj{Mat::Zero(n, n), Mat::Zero(n, n)};
    std::vector<int> outdeg(n, 0), indeg(n, 0);
    for (const auto& e : graph.edges) {
        ++outdeg[e.src];
        ++indeg[e.dst];
    }
    for (const auto& e : graph.edges) {
        adj.a_out(e.src, e.dst) = 1.0 / outdeg[e.src];
        adj.a_in(e.dst, e.src) = 1.0 / indeg[e.dst];
    }
    return adj;
}

namespace {

void fill_normal(Mat& m, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    }
}

}  // namespace

void GatedGraphEncoder::init(int d, std::uint64_t seed) {
    d_g = d;
    std::mt19937_64 rng(seed);
    const double sc = 1.0 / std::sqrt(static_cast<double>(d));

    node_table = Mat(kNodeBuckets, d);
    fill_normal(node_table, rng, 0.1);
    auto mat = [&](Eigen::Index r, Eigen::Index c) {
        Mat m(r, c);
        fill_normal(m, rng, sc);
        return m;
    };
    w_in = mat(d, d);
    w_out = mat(d, d);
    b_in = Mat::Zero(1, d);
    b_out = Mat::Zero(1, d);
    w_z = mat(2 * d, d);
    w_r = mat(2 * d, d);
    w_h = mat(2 * d, d);
    u_z = mat(d, d);
    u_r = mat(d, d);
    u_h = mat(d, d);
    b_z = Mat::Zero(1, d);
    b_r = Mat::Zero(1, d);
    b_h = Mat::Zero(1, d);
    w_att_node = mat(d, d);
    w_att_anchor = mat(d, d);
    b_att = Mat::Zero(1, d);
    v_att = mat(d, 1);
    w_ro = mat(2 * d, d);
    b_ro = Mat::Zero(1, d);

    for (auto& t : tensors("")) {
        *t.grad = Mat::Zero(t.value->rows(), t.value->cols());
    }
}

std::vector<TensorRef> GatedGraphEncoder::tensors(const std::string& prefix) {
    return {
        {prefix + "node_table", &node_table, &g_node_table},
        {prefix + "w_in", &w_in, &g_w_in},
        {prefix + "w_out", &w_out, &g_w_out},
        {prefix + "b_in", &b_in, &g_b_in},
        {prefix + "b_out", &b_out, &g_b_out},
        {prefix + "w_z", &w_z, &g_w_z},
        {prefix + "w_r", &w_r, &g_w_r},
        {prefix + "w_h", &w_h, &g_w_h},
        {prefix + "u_z", &u_z, &g_u_z},
        {prefix + "u_r", &u_r, &g_u_r},
        {prefix + "u_h", &u_h, &g_u_h},
        {prefix + "b_z", &b_z, &g_b_z},
        {prefix + "b_r", &b_r, &g_b_r},
        {prefix + "b_h", &b_h, &g_b_h},
        {prefix + "w_att_node", &w_att_node, &g_w_att_node},
        {prefix + "w_att_anchor", &w_att_anchor, &g_w_att_anchor},
        {prefix + "b_att", &b_att, &g_b_att},
        {prefix + "v_att", &v_att, &g_v_att},
        {prefix + "w_ro", &w_ro, &g_w_ro},
        {prefix + "b_ro", &b_ro, &g_b_ro},
    };
}

int observed_anchor(const ReasoningGraph& graph, const std::string& last_item_id) {
    if (graph.empty()) return -1;
    int last_item_node = -1;
    for (int i = 0; i < static_cast<int>(graph.nodes.size()); ++i) {
        if (graph.nodes[i].kind != NodeKind::Item) continue;
        last_item_node = i;
        if (graph.nodes[i].item_ref == last_item_id) return i;
    }
    return last_item_node >= 0 ? last_item_node : 0;
}

int divergent_anchor(const DivergentGraph& graph) {
    if (graph.empty()) return -1;
    const ReasoningChain* best = nullptr;
    for (const auto& chain : graph.chains) {
        if (!best || chain.score > best->score ||
            (chain.score == best->score && chain.id < best->id)) {
            best = &chain;
        }
    }
    if (best && !best->nodes.empty()) {
        const int idx = graph.find_node(best->nodes.back());
        if (idx >= 0) return idx;
    }
    return 0;
}

ad::Var encode_graph(ad::Tape& tape, GatedGraphEncoder& enc, const ReasoningGraph& graph,
                     int anchor, int steps) {
    if (graph.empty() || anchor < 0) {
        return tape.constant(Mat::Zero(1, enc.d_g));
    }
    const int n = static_cast<int>(graph.nodes.size());
    AdjacencyPair adj = build_adjacency(graph);

    std::vector<int> rows;
    rows.reserve(n);
    for (const auto& node : graph.nodes) rows.push_back(node_bucket(node));
    ad::Var h = tape.gather(enc.node_table, enc.g_node_table, std::move(rows));

    ad::Var w_in = tape.param(&enc.w_in, &enc.g_w_in);
    ad::Var w_out = tape.param(&enc.w_out, &enc.g_w_out);
    ad::Var b_in = tape.param(&enc.b_in, &enc.g_b_in);
    ad::Var b_out = tape.param(&enc.b_out, &enc.g_b_out);
    ad::Var w_z = tape.param(&enc.w_z, &enc.g_w_z);
    ad::Var w_r = tape.param(&enc.w_r, &enc.g_w_r);
    ad::Var w_h = tape.param(&enc.w_h, &enc.g_w_h);
    ad::Var u_z = tape.param(&enc.u_z, &enc.g_u_z);
    ad::Var u_r = tape.param(&enc.u_r, &enc.g_u_r);
    ad::Var u_h = tape.param(&enc.u_h, &enc.g_u_h);
    ad::Var b_z = tape.param(&enc.b_z, &enc.g_b_z);
    ad::Var b_r = tape.param(&enc.b_r, &enc.g_b_r);
    ad::Var b_h = tape.param(&enc.b_h, &enc.g_b_h);

    for (int t = 0; t < steps; ++t) {
        ad::Var m_in = tape.add_broadcast_row(
            tape.matmul(tape.lmul_const(adj.a_in, h), w_in), b_in);
        ad::Var m_out = tape.add_broadcast_row(
            tape.matmul(tape.lmul_const(adj.a_out, h), w_out), b_out);
        ad::Var a = tape.concat_cols({m_in, m_out});

        ad::Var z = tape.sigmoid(tape.add_broadcast_row(
            tape.add(tape.matmul(a, w_z), tape.matmul(h, u_z)), b_z));
        ad::Var r = tape.sigmoid(tape.add_broadcast_row(
            tape.add(tape.matmul(a, w_r), tape.matmul(h, u_r)), b_r));
        ad::Var cand = tape.tanh(tape.add_broadcast_row(
            tape.add(tape.matmul(a, w_h), tape.matmul(tape.cmul(r, h), u_h)), b_h));

        ad::Var keep = tape.cmul(tape.affine(z, -1.0, 1.0), h);
        h = tape.add(keep, tape.cmul(z, cand));
    }

    ad::Var h_anchor = tape.slice_rows(h, anchor, 1);

    // Additive attention scored against the anchor state.
    ad::Var w_an = tape.param(&enc.w_att_node, &enc.g_w_att_node);
    ad::Var w_aa = tape.param(&enc.w_att_anchor, &enc.g_w_att_anchor);
    ad::Var b_att = tape.param(&enc.b_att, &enc.g_b_att);
    ad::Var v_att = tape.param(&enc.v_att, &enc.g_v_att);
    ad::Var energy = tape.tanh(tape.add_broadcast_row(
        tape.add_broadcast_row(tape.matmul(h, w_an), tape.matmul(h_anchor, w_aa)), b_att));
    ad::Var scores = tape.transpose(tape.matmul(energy, v_att));  // 1 x N
    ad::Var alpha = tape.softmax_rows(scores);
    ad::Var pooled = tape.matmul(alpha, h);  // 1 x d_g

    ad::Var w_ro = tape.param(&enc.w_ro, &enc.g_w_ro);
    ad::Var b_ro = tape.param(&enc.b_ro, &enc.g_b_ro);
    return tape.tanh(tape.add_broadcast_row(
        tape.matmul(tape.concat_cols({pooled, h_anchor}), w_ro), b_ro));
}

}  // namespace llmrg
