#include "llmrg/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace llmrg {

namespace {

// Lowercase + collapse whitespace, keeping punctuation (titles like
// "toy story (1995)" stay intact).
std::string normalize_title(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

struct RawEvent {
    std::string item_id;
    long long timestamp = 0;
    std::size_t file_order = 0;
};

// Sort chronologically (file order breaks ties), then drop all but the
// earliest occurrence of each item.
std::vector<std::string> dedup_and_sort(std::vector<RawEvent> events) {
    std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.file_order < b.file_order;
    });
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (auto& e : events) {
        if (seen.insert(e.item_id).second) out.push_back(std::move(e.item_id));
    }
    return out;
}

std::vector<std::string> split_on(const std::string& text, const std::string& delim) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = text.find(delim, pos);
        parts.push_back(text.substr(pos, next == std::string::npos ? next : next - pos));
        if (next == std::string::npos) break;
        pos = next + delim.size();
    }
    return parts;
}

// Iterative min-interaction filtering until stable.
void apply_min_core(std::map<std::string, std::vector<RawEvent>>& by_user,
                    const IngestOptions& options) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<std::string, int> item_counts;
        for (const auto& [user, events] : by_user) {
            for (const auto& e : events) ++item_counts[e.item_id];
        }
        for (auto& [user, events] : by_user) {
            auto kept = std::remove_if(events.begin(), events.end(), [&](const RawEvent& e) {
                return item_counts[e.item_id] < options.min_item_interactions;
            });
            if (kept != events.end()) {
                events.erase(kept, events.end());
                changed = true;
            }
        }
        for (auto it = by_user.begin(); it != by_user.end();) {
            if (static_cast<int>(it->second.size()) < options.min_user_interactions) {
                it = by_user.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
}

ParsedDataset assemble(const Catalog& full_catalog,
                       std::map<std::string, std::vector<RawEvent>> by_user,
                       std::size_t skipped, const IngestOptions& options) {
    if (options.min_core_filter) apply_min_core(by_user, options);

    ParsedDataset out;
    out.skipped_records = skipped;

    std::set<std::string> used_items;
    for (auto& [user_id, events] : by_user) {
        if (events.empty()) continue;
        InteractionSequence seq;
        seq.user_id = user_id;
        seq.events = dedup_and_sort(std::move(events));
        for (const auto& id : seq.events) used_items.insert(id);
        out.sequences.push_back(std::move(seq));
    }

    // Catalog keeps only interacted items; user attributes are the union of
    // their items' attributes.
    for (const auto& item : full_catalog.items) {
        if (used_items.count(item.id)) out.catalog.add(item);
    }
    for (auto& seq : out.sequences) {
        std::set<std::string> attrs;
        for (const auto& id : seq.events) {
            const Item* item = out.catalog.find(id);
            if (item) attrs.insert(item->attributes.begin(), item->attributes.end());
        }
        seq.attributes.assign(attrs.begin(), attrs.end());
    }
    return out;
}

}  // namespace

DatasetStats compute_stats(const std::vector<InteractionSequence>& sequences) {
    DatasetStats stats;
    std::set<std::string> items;
    for (const auto& seq : sequences) {
        if (seq.events.empty()) continue;
        ++stats.n_users;
        stats.n_actions += seq.events.size();
        items.insert(seq.events.begin(), seq.events.end());
    }
    stats.n_items = items.size();
    if (stats.n_users > 0 && stats.n_items > 0) {
        stats.avg_length = static_cast<double>(stats.n_actions) / stats.n_users;
        stats.sparsity = 1.0 - static_cast<double>(stats.n_actions) /
                                   (static_cast<double>(stats.n_users) * stats.n_items);
    }
    return stats;
}

ParsedDataset parse_movielens(const std::string& ratings_path,
                              const std::string& movies_path,
                              const IngestOptions& options) {
    Catalog catalog;
    {
        std::ifstream is(movies_path);
        if (!is) throw IngestError("cannot open movies file: " + movies_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto parts = split_on(line, "::");
            if (parts.size() != 3) {
                throw IngestError(movies_path + ":" + std::to_string(line_no) +
                                  ": expected MovieID::Title::Genres");
            }
            Item item;
            item.id = parts[0];
            item.title = normalize_title(parts[1]);
            if (item.title.empty()) {
                throw IngestError(movies_path + ":" + std::to_string(line_no) +
                                  ": empty title");
            }
            std::set<std::string> attrs;
            for (const auto& genre : split_on(parts[2], "|")) {
                if (auto label = canonicalize_label(genre)) attrs.insert(*label);
            }
            item.attributes.assign(attrs.begin(), attrs.end());
            catalog.add(std::move(item));
        }
    }

    std::map<std::string, std::vector<RawEvent>> by_user;
    std::size_t skipped = 0;
    {
        std::ifstream is(ratings_path);
        if (!is) throw IngestError("cannot open ratings file: " + ratings_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto parts = split_on(line, "::");
            if (parts.size() != 4) {
                throw IngestError(ratings_path + ":" + std::to_string(line_no) +
                                  ": expected UserID::MovieID::Rating::Timestamp");
            }
            if (!catalog.find(parts[1])) {
                ++skipped;  // rating for a movie absent from the movies file
                continue;
            }
            RawEvent event;
            event.item_id = parts[1];
            try {
                event.timestamp = std::stoll(parts[3]);
            } catch (const std::exception&) {
                throw IngestError(ratings_path + ":" + std::to_string(line_no) +
                                  ": bad timestamp");
            }
            event.file_order = line_no;
            by_user[parts[0]].push_back(std::move(event));
        }
    }
    return assemble(catalog, std::move(by_user), skipped, options);
}

ParsedDataset parse_amazon(const std::string& reviews_path,
                           const std::string& meta_path,
                           const IngestOptions& options) {
    using nlohmann::json;
    Catalog catalog;
    std::size_t skipped = 0;
    {
        std::ifstream is(meta_path);
        if (!is) throw IngestError("cannot open metadata file: " + meta_path);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto rec = json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.contains("asin") || !rec.contains("title")) {
                ++skipped;
                continue;
            }
            Item item;
            item.id = rec["asin"].get<std::string>();
            item.title = normalize_title(rec["title"].get<std::string>());
            if (item.title.empty() || catalog.find(item.id)) {
                ++skipped;
                continue;
            }
            std::set<std::string> attrs;
            if (rec.contains("categories")) {
                // Either a flat list or a list of category paths.
                for (const auto& entry : rec["categories"]) {
                    if (entry.is_string()) {
                        if (auto label = canonicalize_label(entry.get<std::string>()))
                            attrs.insert(*label);
                    } else if (entry.is_array()) {
                        for (const auto& leaf : entry) {
                            if (!leaf.is_string()) continue;
                            if (auto label = canonicalize_label(leaf.get<std::string>()))
                                attrs.insert(*label);
                        }
                    }
                }
            }
            if (rec.contains("brand") && rec["brand"].is_string()) {
                if (auto label = canonicalize_label(rec["brand"].get<std::string>()))
                    attrs.insert(*label);
            }
            item.attributes.assign(attrs.begin(), attrs.end());
            catalog.add(std::move(item));
        }
    }

    std::map<std::string, std::vector<RawEvent>> by_user;
    {
        std::ifstream is(reviews_path);
        if (!is) throw IngestError("cannot open reviews file: " + reviews_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto rec = json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.contains("reviewerID") ||
                !rec.contains("asin") || !rec.contains("unixReviewTime")) {
                ++skipped;
                continue;
            }
            const std::string asin = rec["asin"].get<std::string>();
            if (!catalog.find(asin)) {
                ++skipped;
                continue;
            }
            RawEvent event;
            event.item_id = asin;
            event.timestamp = rec["unixReviewTime"].get<long long>();
            event.file_order = line_no;
            by_user[rec["reviewerID"].get<std::string>()].push_back(std::move(event));
        }
    }
    return assemble(catalog, std::move(by_user), skipped, options);
}

LeaveOneOutSplit build_split(const std::vector<InteractionSequence>& sequences,
                             std::size_t l_tru) {
    if (l_tru == 0) throw std::invalid_argument("l_tru must be positive");
    LeaveOneOutSplit split;
    split.l_tru = l_tru;
    for (const auto& seq : sequences) {
        if (seq.events.size() < 2) {
            ++split.dropped;
            continue;
        }
        LeaveOneOutSplit::UserSplit user;
        user.user_id = seq.user_id;
        user.target = seq.events.back();
        user.full_prefix.assign(seq.events.begin(), seq.events.end() - 1);
        const std::size_t take = std::min(user.full_prefix.size(), l_tru);
        user.input.assign(user.full_prefix.end() - take, user.full_prefix.end());
        user.attributes = seq.attributes;
        split.users.push_back(std::move(user));
    }
    return split;
}

}  // namespace llmrg
