#include "llmrg/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace llmrg {

int rank_of_target(const std::vector<double>& scores, const Catalog& catalog,
                   int target_position) {
    const double target_score = scores[target_position];
    const std::string& target_id = catalog.items[target_position].id;
    int rank = 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (static_cast<int>(i) == target_position) continue;
        if (scores[i] > target_score ||
            (scores[i] == target_score && catalog.items[i].id < target_id)) {
            ++rank;
        }
    }
    return rank;
}

double hr_at_n(const std::vector<int>& ranks, int n) {
    if (ranks.empty()) return 0.0;
    std::size_t hits = 0;
    for (int r : ranks) {
        if (r >= 1 && r <= n) ++hits;
    }
    return static_cast<double>(hits) / ranks.size();
}

double ndcg_at_n(const std::vector<int>& ranks, int n) {
    if (ranks.empty()) return 0.0;
    double sum = 0.0;
    for (int r : ranks) {
        if (r >= 1 && r <= n) sum += 1.0 / std::log2(r + 1.0);
    }
    return sum / ranks.size();
}

RecExample training_example(const Catalog& catalog, const LeaveOneOutSplit::UserSplit& user,
                            const UserGraphs* graphs) {
    RecExample ex;
    ex.graphs = graphs;
    if (user.input.size() < 2) return ex;  // nothing to train on
    for (std::size_t i = 0; i + 1 < user.input.size(); ++i) {
        const int pos = catalog.position(user.input[i]);
        if (pos >= 0) ex.input_positions.push_back(pos);
    }
    ex.target_position = catalog.position(user.input.back());
    if (!ex.input_positions.empty()) {
        ex.anchor_item = user.input[user.input.size() - 2];
    }
    if (ex.input_positions.empty() || ex.target_position < 0) {
        ex.input_positions.clear();
        ex.target_position = -1;
    }
    return ex;
}

RecExample eval_example(const Catalog& catalog, const LeaveOneOutSplit::UserSplit& user,
                        const UserGraphs* graphs) {
    RecExample ex;
    ex.graphs = graphs;
    for (const auto& id : user.input) {
        const int pos = catalog.position(id);
        if (pos >= 0) ex.input_positions.push_back(pos);
    }
    ex.target_position = catalog.position(user.target);
    if (!user.input.empty()) ex.anchor_item = user.input.back();
    return ex;
}

EvalReport evaluate(const Catalog& catalog, const LeaveOneOutSplit& split,
                    const std::map<std::string, UserGraphs>& graphs,
                    const PipelineConfig& config, const EvalOptions& options) {
    EvalReport report;

    // Fixed user roster shared by every seed.
    std::vector<const LeaveOneOutSplit::UserSplit*> roster;
    std::vector<const UserGraphs*> roster_graphs;
    for (const auto& user : split.users) {
        const UserGraphs* ug = nullptr;
        if (auto it = graphs.find(user.user_id); it != graphs.end()) ug = &it->second;
        if (!ug && options.mode != FusionMode::BaseOnly) {
            ++report.users_excluded_missing_graphs;
            continue;
        }
        if (catalog.position(user.target) < 0) continue;
        roster.push_back(&user);
        roster_graphs.push_back(ug);
    }
    report.users_evaluated = roster.size();

    for (std::uint64_t seed : options.seeds) {
        PipelineConfig cfg = config;
        cfg.seed = seed;
        RecModel model;
        model.init(cfg, static_cast<int>(catalog.size()));
        model.mode = options.mode;

        std::vector<RecExample> train_set;
        for (std::size_t i = 0; i < roster.size(); ++i) {
            RecExample ex = training_example(catalog, *roster[i], roster_graphs[i]);
            if (ex.target_position >= 0) train_set.push_back(std::move(ex));
        }
        TrainOptions topt;
        topt.learning_rate = cfg.learning_rate;
        topt.epochs = cfg.epochs;
        topt.seed = seed;
        train(model, train_set, topt);

        std::vector<int> ranks;
        ranks.reserve(roster.size());
        for (std::size_t i = 0; i < roster.size(); ++i) {
            RecExample ex = eval_example(catalog, *roster[i], roster_graphs[i]);
            std::vector<double> scores = score_all(model, ex);
            ranks.push_back(rank_of_target(scores, catalog, ex.target_position));
        }

        SeedResult result;
        result.seed = seed;
        result.evaluated = ranks.size();
        for (int n : options.cutoffs) {
            result.hr[n] = hr_at_n(ranks, n);
            result.ndcg[n] = ndcg_at_n(ranks, n);
        }
        report.per_seed.push_back(std::move(result));
    }

    const double count = static_cast<double>(report.per_seed.size());
    for (int n : options.cutoffs) {
        double hr_sum = 0.0, ndcg_sum = 0.0;
        for (const auto& s : report.per_seed) {
            hr_sum += s.hr.at(n);
            ndcg_sum += s.ndcg.at(n);
        }
        const double hr_mean = count > 0 ? hr_sum / count : 0.0;
        const double ndcg_mean = count > 0 ? ndcg_sum / count : 0.0;
        double hr_var = 0.0, ndcg_var = 0.0;
        for (const auto& s : report.per_seed) {
            hr_var += (s.hr.at(n) - hr_mean) * (s.hr.at(n) - hr_mean);
            ndcg_var += (s.ndcg.at(n) - ndcg_mean) * (s.ndcg.at(n) - ndcg_mean);
        }
        report.hr_mean[n] = hr_mean;
        report.hr_std[n] = count > 0 ? std::sqrt(hr_var / count) : 0.0;
        report.ndcg_mean[n] = ndcg_mean;
        report.ndcg_std[n] = count > 0 ? std::sqrt(ndcg_var / count) : 0.0;
    }
    return report;
}

void write_eval_json(const std::string& path, const EvalReport& report) {
    nlohmann::json doc;
    doc["users_evaluated"] = report.users_evaluated;
    doc["users_excluded_missing_graphs"] = report.users_excluded_missing_graphs;
    auto metric_obj = [](const std::map<int, double>& m) {
        nlohmann::json obj;
        for (const auto& [n, v] : m) obj[std::to_string(n)] = v;
        return obj;
    };
    doc["hr_mean"] = metric_obj(report.hr_mean);
    doc["hr_std"] = metric_obj(report.hr_std);
    doc["ndcg_mean"] = metric_obj(report.ndcg_mean);
    doc["ndcg_std"] = metric_obj(report.ndcg_std);
    doc["per_seed"] = nlohmann::json::array();
    for (const auto& s : report.per_seed) {
        doc["per_seed"].push_back({{"seed", s.seed},
                                   {"evaluated", s.evaluated},
                                   {"hr", metric_obj(s.hr)},
                                   {"ndcg", metric_obj(s.ndcg)}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

void write_per_seed_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "seed,metric,cutoff,value\n";
    out << std::setprecision(10);
    for (const auto& s : report.per_seed) {
        for (const auto& [n, v] : s.hr) {
            out << s.seed << ",hr," << n << "," << v << "\n";
        }
        for (const auto& [n, v] : s.ndcg) {
            out << s.seed << ",ndcg," << n << "," << v << "\n";
        }
    }
}

std::string format_eval_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(10) << "metric" << std::right << std::setw(10) << "mean"
        << std::setw(10) << "std" << "\n";
    for (const auto& [n, mean] : report.hr_mean) {
        out << std::left << std::setw(10) << ("HR@" + std::to_string(n)) << std::right
            << std::setw(10) << mean << std::setw(10) << report.hr_std.at(n) << "\n";
    }
    for (const auto& [n, mean] : report.ndcg_mean) {
        out << std::left << std::setw(10) << ("NDCG@" + std::to_string(n)) << std::right
            << std::setw(10) << mean << std::setw(10) << report.ndcg_std.at(n) << "\n";
    }
    out << "users evaluated: " << report.users_evaluated
        << "  excluded (no graphs): " << report.users_excluded_missing_graphs << "\n";
    return out.str();
}

}  // namespace llmrg
