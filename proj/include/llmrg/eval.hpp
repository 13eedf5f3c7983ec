// Leave-one-out evaluation. Each user's chronologically last event is the
// target; the model ranks the full catalog (no exclusions) and the target's
// 1-based rank feeds HR@n and NDCG@n. Evaluation retrains from scratch per
// seed and reports mean and population standard deviation across seeds.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "llmrg/config.hpp"
#include "llmrg/domain.hpp"
#include "llmrg/ingest.hpp"
#include "llmrg/recommend.hpp"

namespace llmrg {

// 1-based rank of the target among all catalog items under the ranking rule
// (score descending, ties toward the smaller item id).
int rank_of_target(const std::vector<double>& scores, const Catalog& catalog,
                   int target_position);

// Means over the given 1-based ranks. A rank outside 1..n contributes 0;
// NDCG credit is 1/log2(rank + 1).
double hr_at_n(const std::vector<int>& ranks, int n);
double ndcg_at_n(const std::vector<int>& ranks, int n);

struct EvalOptions {
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<int> cutoffs = {5, 10, 20};
    FusionMode mode = FusionMode::Full;
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::map<int, double> hr;
    std::map<int, double> ndcg;
    std::size_t evaluated = 0;
};

struct EvalReport {
    std::vector<SeedResult> per_seed;
    std::map<int, double> hr_mean, hr_std;
    std::map<int, double> ndcg_mean, ndcg_std;
    std::size_t users_excluded_missing_graphs = 0;
    std::size_t users_evaluated = 0;
};

// Builds the training example for one user: prefix = input minus its last
// event (the training target). Users with fewer than two input events train
// nothing but are still evaluated.
RecExample training_example(const Catalog& catalog, const LeaveOneOutSplit::UserSplit& user,
                            const UserGraphs* graphs);
RecExample eval_example(const Catalog& catalog, const LeaveOneOutSplit::UserSplit& user,
                        const UserGraphs* graphs);

EvalReport evaluate(const Catalog& catalog, const LeaveOneOutSplit& split,
                    const std::map<std::string, UserGraphs>& graphs,
                    const PipelineConfig& config, const EvalOptions& options);

void write_eval_json(const std::string& path, const EvalReport& report);
void write_per_seed_csv(const std::string& path, const EvalReport& report);
std::string format_eval_table(const EvalReport& report);

}  // namespace llmrg
