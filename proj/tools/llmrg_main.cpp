// llmrg command-line front end. Stages communicate through flat files, so any
// stage can be rerun in isolation: ingest -> build-graphs -> train ->
// evaluate/predict. All outputs are byte-reproducible for a fixed --seed with
// the mock backend.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "llmrg/config.hpp"
#include "llmrg/eval.hpp"
#include "llmrg/ingest.hpp"
#include "llmrg/kbase.hpp"
#include "llmrg/pipeline.hpp"
#include "llmrg/recommend.hpp"
#include "llmrg/serialize.hpp"

namespace {

using namespace llmrg;

int g_log_level = 1;  // 0 error, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[llmrg] " << msg << "\n";
}

struct GlobalOpts {
    std::string config_path;
    std::string backend = "mock";
    std::string log_level = "info";
    int jobs = 1;
    // CLI overrides; negative/zero sentinel means "not set".
    long long seed = -1;
    int tau = -1;
    long long l_tru = -1;
};

PipelineConfig resolve_config(const GlobalOpts& g) {
    PipelineConfig cfg;
    if (!g.config_path.empty()) cfg = load_config_file(g.config_path, cfg);
    if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
    if (g.tau >= 0) cfg.tau = g.tau;
    if (g.l_tru > 0) cfg.l_tru = static_cast<std::size_t>(g.l_tru);
    validate(cfg);
    return cfg;
}

BackendConfig resolve_backend(const GlobalOpts& g, const std::string& endpoint,
                              const std::string& model) {
    BackendConfig bc;
    bc.kind = g.backend == "http" ? BackendKind::Http : BackendKind::Mock;
    bc.endpoint = endpoint;
    if (!model.empty()) bc.model = model;
    bc.parallelism = g.jobs;
    return bc;
}

struct Dataset {
    Catalog catalog;
    std::vector<InteractionSequence> sequences;
};

void write_dataset(const std::string& path, const ParsedDataset& parsed) {
    nlohmann::json doc;
    doc["catalog"] = catalog_to_json(parsed.catalog);
    doc["sequences"] = sequences_to_json(parsed.sequences);
    doc["skipped_records"] = parsed.skipped_records;
    write_json_file(path, doc);
}

Dataset read_dataset(const std::string& path) {
    nlohmann::json doc = read_json_file(path);
    return {catalog_from_json(doc.at("catalog")),
            sequences_from_json(doc.at("sequences"))};
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) seeds.push_back(std::stoull(part));
    }
    return seeds;
}

FusionMode parse_mode(const std::string& text) {
    if (text == "base") return FusionMode::BaseOnly;
    if (text == "nodiv") return FusionMode::NoDivergent;
    return FusionMode::Full;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM reasoning graphs for sequential recommendation"};
    app.require_subcommand(1);

    GlobalOpts g;
    std::string endpoint, model_name;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "override random seed");
    app.add_option("--backend", g.backend, "mock or http")
        ->check(CLI::IsMember({"mock", "http"}));
    app.add_option("--endpoint", endpoint, "http backend base url");
    app.add_option("--model", model_name, "http backend model name");
    app.add_option("--tau", g.tau, "verification threshold 0..100");
    app.add_option("--l-tru", g.l_tru, "sequence truncation length");
    app.add_option("--log-level", g.log_level, "error, info or debug")
        ->check(CLI::IsMember({"error", "info", "debug"}));
    app.add_option("--jobs", g.jobs, "backend parallelism")->check(CLI::PositiveNumber);

    // ingest
    auto* cmd_ingest = app.add_subcommand("ingest", "parse a raw dataset");
    std::string dataset_kind, ratings, movies, reviews, meta, ingest_out;
    bool min_core = false;
    cmd_ingest->add_option("--dataset", dataset_kind, "movielens or amazon")
        ->required()
        ->check(CLI::IsMember({"movielens", "amazon"}));
    cmd_ingest->add_option("--ratings", ratings, "ml ratings.dat");
    cmd_ingest->add_option("--movies", movies, "ml movies.dat");
    cmd_ingest->add_option("--reviews", reviews, "amazon reviews jsonl");
    cmd_ingest->add_option("--meta", meta, "amazon metadata jsonl");
    cmd_ingest->add_option("--out", ingest_out, "dataset json output")->required();
    cmd_ingest->add_flag("--min-core", min_core, "apply iterative 5-core filter");

    // stats
    auto* cmd_stats = app.add_subcommand("stats", "dataset statistics");
    std::string stats_data;
    cmd_stats->add_option("--data", stats_data, "dataset json")->required();

    // build-graphs
    auto* cmd_build = app.add_subcommand("build-graphs", "run phi for every user");
    std::string build_data, build_out, build_journal, cache_csv;
    std::size_t cache_window = 300;
    cmd_build->add_option("--data", build_data, "dataset json")->required();
    cmd_build->add_option("--out", build_out, "graphs json output")->required();
    cmd_build->add_option("--cache-journal", build_journal, "knowledge-base journal (jsonl)");
    cmd_build->add_option("--cache-csv", cache_csv, "windowed access-frequency csv");
    cmd_build->add_option("--cache-window", cache_window, "sliding window size");

    // train
    auto* cmd_train = app.add_subcommand("train", "joint SGD training");
    std::string train_data, train_graphs, train_out, train_mode = "full";
    cmd_train->add_option("--data", train_data, "dataset json")->required();
    cmd_train->add_option("--graphs", train_graphs, "graphs json")->required();
    cmd_train->add_option("--out", train_out, "model checkpoint output")->required();
    cmd_train->add_option("--mode", train_mode, "full, base or nodiv")
        ->check(CLI::IsMember({"full", "base", "nodiv"}));

    // evaluate
    auto* cmd_eval = app.add_subcommand("evaluate", "leave-one-out evaluation");
    std::string eval_data, eval_graphs, eval_report, eval_csv, eval_mode = "full";
    std::string eval_seeds = "1,2,3,4,5";
    cmd_eval->add_option("--data", eval_data, "dataset json")->required();
    cmd_eval->add_option("--graphs", eval_graphs, "graphs json")->required();
    cmd_eval->add_option("--report", eval_report, "json report output");
    cmd_eval->add_option("--csv", eval_csv, "per-seed csv output");
    cmd_eval->add_option("--seeds", eval_seeds, "comma-separated seed list");
    cmd_eval->add_option("--mode", eval_mode, "full, base or nodiv")
        ->check(CLI::IsMember({"full", "base", "nodiv"}));

    // predict
    auto* cmd_predict = app.add_subcommand("predict", "top-n for one user");
    std::string pred_data, pred_graphs, pred_model, pred_user, pred_mode = "full";
    int pred_top = 10;
    cmd_predict->add_option("--data", pred_data, "dataset json")->required();
    cmd_predict->add_option("--graphs", pred_graphs, "graphs json")->required();
    cmd_predict->add_option("--model", pred_model, "model checkpoint")->required();
    cmd_predict->add_option("--user", pred_user, "user id")->required();
    cmd_predict->add_option("--top", pred_top, "list length")->check(CLI::PositiveNumber);
    cmd_predict->add_option("--mode", pred_mode, "full, base or nodiv")
        ->check(CLI::IsMember({"full", "base", "nodiv"}));

    // export-graph
    auto* cmd_export = app.add_subcommand("export-graph", "dump one user's graphs");
    std::string exp_graphs, exp_user, exp_format = "dot", exp_out;
    cmd_export->add_option("--graphs", exp_graphs, "graphs json")->required();
    cmd_export->add_option("--user", exp_user, "user id")->required();
    cmd_export->add_option("--format", exp_format, "dot or json")
        ->check(CLI::IsMember({"dot", "json"}));
    cmd_export->add_option("--out", exp_out, "output file (stdout when omitted)");

    // cache-stats
    auto* cmd_cache = app.add_subcommand("cache-stats", "knowledge-base telemetry");
    std::string cs_data, cs_csv;
    std::size_t cs_window = 300;
    cmd_cache->add_option("--data", cs_data, "dataset json")->required();
    cmd_cache->add_option("--csv", cs_csv, "windowed access-frequency csv");
    cmd_cache->add_option("--window", cs_window, "sliding window size");

    CLI11_PARSE(app, argc, argv);

    if (g.log_level == "error") g_log_level = 0;
    if (g.log_level == "debug") g_log_level = 2;

    try {
        PipelineConfig cfg = resolve_config(g);

        if (*cmd_ingest) {
            ParsedDataset parsed;
            IngestOptions opts;
            opts.min_core_filter = min_core;
            if (dataset_kind == "movielens") {
                if (ratings.empty() || movies.empty()) {
                    std::cerr << "movielens needs --ratings and --movies\n";
                    return 1;
                }
                parsed = parse_movielens(ratings, movies, opts);
            } else {
                if (reviews.empty() || meta.empty()) {
                    std::cerr << "amazon needs --reviews and --meta\n";
                    return 1;
                }
                parsed = parse_amazon(reviews, meta, opts);
            }
            write_dataset(ingest_out, parsed);
            log_info("ingested " + std::to_string(parsed.sequences.size()) + " users, " +
                     std::to_string(parsed.catalog.size()) + " items (" +
                     std::to_string(parsed.skipped_records) + " records skipped)");
        } else if (*cmd_stats) {
            Dataset data = read_dataset(stats_data);
            DatasetStats stats = compute_stats(data.sequences);
            std::printf("users      %zu\n", stats.n_users);
            std::printf("items      %zu\n", stats.n_items);
            std::printf("actions    %zu\n", stats.n_actions);
            std::printf("avg_length %.2f\n", stats.avg_length);
            std::printf("sparsity   %.4f%%\n", stats.sparsity * 100.0);
        } else if (*cmd_build || *cmd_cache) {
            const std::string& data_path = *cmd_build ? build_data : cs_data;
            Dataset data = read_dataset(data_path);
            LeaveOneOutSplit split = build_split(data.sequences, cfg.l_tru);
            BackendConfig bc = resolve_backend(g, endpoint, model_name);
            auto backend = make_backend(bc, cfg, data.catalog);
            KnowledgeBase kbase(cfg.cache_capacity);
            if (*cmd_build && !build_journal.empty()) kbase.attach_journal(build_journal);

            GraphBuildResult result =
                build_all_graphs(data.catalog, split, cfg, *backend, kbase);

            if (*cmd_build) {
                write_graphs_file(build_out, result.graphs);
                log_info("graphs for " + std::to_string(result.graphs.size()) + " users (" +
                         std::to_string(result.rejected_chains) + " chains rejected)");
            }
            std::printf("cache lookups %llu hits %llu calls %llu\n",
                        static_cast<unsigned long long>(result.cache.lookups),
                        static_cast<unsigned long long>(result.cache.hits),
                        static_cast<unsigned long long>(result.cache.calls));
            const std::string& csv = *cmd_build ? cache_csv : cs_csv;
            const std::size_t window = *cmd_build ? cache_window : cs_window;
            if (!csv.empty()) {
                auto freq = kbase.windowed_access_frequency(window);
                std::ofstream out(csv);
                if (!out) throw std::runtime_error("cannot write " + csv);
                out << "step,access_frequency\n";
                for (const auto& [step, value] : freq) {
                    out << step << "," << value << "\n";
                }
            }
        } else if (*cmd_train) {
            Dataset data = read_dataset(train_data);
            LeaveOneOutSplit split = build_split(data.sequences, cfg.l_tru);
            auto graphs = read_graphs_file(train_graphs);

            RecModel model;
            model.init(cfg, static_cast<int>(data.catalog.size()));
            model.mode = parse_mode(train_mode);

            std::vector<RecExample> examples;
            for (const auto& user : split.users) {
                const UserGraphs* ug = nullptr;
                if (auto it = graphs.find(user.user_id); it != graphs.end()) ug = &it->second;
                RecExample ex = training_example(data.catalog, user, ug);
                if (ex.target_position >= 0) examples.push_back(std::move(ex));
            }
            TrainOptions topt{cfg.learning_rate, cfg.epochs, cfg.seed};
            TrainStats stats = train(model, examples, topt);
            for (std::size_t e = 0; e < stats.epoch_mean_loss.size(); ++e) {
                std::printf("epoch %zu loss %.6f\n", e + 1, stats.epoch_mean_loss[e]);
            }
            save_tensors(train_out, model.tensors());
            log_info("checkpoint written to " + train_out);
        } else if (*cmd_eval) {
            Dataset data = read_dataset(eval_data);
            LeaveOneOutSplit split = build_split(data.sequences, cfg.l_tru);
            auto graphs = read_graphs_file(eval_graphs);

            EvalOptions opts;
            opts.seeds = parse_seed_list(eval_seeds);
            opts.mode = parse_mode(eval_mode);
            EvalReport report = evaluate(data.catalog, split, graphs, cfg, opts);
            std::cout << format_eval_table(report);
            if (!eval_report.empty()) write_eval_json(eval_report, report);
            if (!eval_csv.empty()) write_per_seed_csv(eval_csv, report);
        } else if (*cmd_predict) {
            Dataset data = read_dataset(pred_data);
            LeaveOneOutSplit split = build_split(data.sequences, cfg.l_tru);
            auto graphs = read_graphs_file(pred_graphs);

            const LeaveOneOutSplit::UserSplit* user = nullptr;
            for (const auto& u : split.users) {
                if (u.user_id == pred_user) user = &u;
            }
            if (!user) throw std::runtime_error("unknown user: " + pred_user);

            RecModel model;
            model.init(cfg, static_cast<int>(data.catalog.size()));
            model.mode = parse_mode(pred_mode);
            load_tensors(pred_model, model.tensors());

            const UserGraphs* ug = nullptr;
            if (auto it = graphs.find(pred_user); it != graphs.end()) ug = &it->second;
            RecExample ex = eval_example(data.catalog, *user, ug);
            std::vector<double> scores = score_all(model, ex);
            for (int pos : top_n_positions(scores, data.catalog, pred_top)) {
                std::printf("%s\t%s\t%.6f\n", data.catalog.items[pos].id.c_str(),
                            data.catalog.items[pos].title.c_str(), scores[pos]);
            }
        } else if (*cmd_export) {
            auto graphs = read_graphs_file(exp_graphs);
            auto it = graphs.find(exp_user);
            if (it == graphs.end()) throw std::runtime_error("unknown user: " + exp_user);
            std::string text = exp_format == "dot"
                                   ? user_graphs_to_dot(it->second)
                                   : user_graphs_to_json(it->second).dump(2) + "\n";
            if (exp_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(exp_out);
                if (!out) throw std::runtime_error("cannot write " + exp_out);
                out << text;
            }
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
