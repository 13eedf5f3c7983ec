// Dataset parsing and preprocessing: per user, duplicate interactions are
// removed (earliest kept) and the rest sorted chronologically, ties broken by
// file order. All interactions are treated as implicit feedback.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "llmrg/domain.hpp"

namespace llmrg {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetStats {
    std::size_t n_users = 0;
    std::size_t n_items = 0;   // distinct items with at least one action
    std::size_t n_actions = 0;
    double avg_length = 0.0;
    double sparsity = 0.0;     // 1 - actions / (users * items)
};

DatasetStats compute_stats(const std::vector<InteractionSequence>& sequences);

struct IngestOptions {
    // Optional iterative min-interaction filter (users >= 5, items >= 5);
    // off by default.
    bool min_core_filter = false;
    int min_user_interactions = 5;
    int min_item_interactions = 5;
};

struct ParsedDataset {
    Catalog catalog;  // restricted to items that appear in some sequence
    std::vector<InteractionSequence> sequences;
    std::size_t skipped_records = 0;  // malformed or unresolvable records
};

// ML-1M layout: ratings "UserID::MovieID::Rating::Timestamp", movies
// "MovieID::Title::Genres" with genres split on '|' into attributes.
// Malformed lines raise IngestError naming the line number; ratings for
// unknown movie ids are skipped and counted.
ParsedDataset parse_movielens(const std::string& ratings_path,
                              const std::string& movies_path,
                              const IngestOptions& options = {});

// Line-delimited JSON: reviews need reviewerID, asin and unixReviewTime;
// metadata needs asin and title, with categories + brand as attributes.
// Records missing a required field are skipped and counted.
ParsedDataset parse_amazon(const std::string& reviews_path,
                           const std::string& meta_path,
                           const IngestOptions& options = {});

struct LeaveOneOutSplit {
    struct UserSplit {
        std::string user_id;
        std::vector<std::string> input;  // most recent min(n-1, l_tru) prefix events
        std::vector<std::string> full_prefix;
        std::string target;              // chronologically last event
        std::vector<std::string> attributes;
    };
    std::vector<UserSplit> users;
    std::size_t l_tru = 0;
    std::size_t dropped = 0;  // users with fewer than 2 events
};

LeaveOneOutSplit build_split(const std::vector<InteractionSequence>& sequences,
                             std::size_t l_tru);

}  // namespace llmrg
