#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "llmrg/ingest.hpp"

using namespace llmrg;

namespace {

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content) : path(name) {
        std::ofstream os(path);
        os << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("movielens parsing, ordering and dedup") {
    TempFile movies("t_movies.dat",
                    "1::Toy Story (1995)::Animation|Children's|Comedy\n"
                    "2::Jumanji (1995)::Adventure|Children's|Fantasy\n"
                    "3::Heat (1995)::Action|Crime|Thriller\n");
    TempFile ratings("t_ratings.dat",
                     "u1::2::5::300\n"
                     "u1::1::4::100\n"
                     "u1::1::3::200\n"   // duplicate item, later timestamp dropped
                     "u1::3::4::200\n"   // same ts as the dup; file order breaks the tie
                     "u2::3::5::50\n"
                     "u2::9::5::60\n");  // unknown movie -> skipped

    ParsedDataset data = parse_movielens(ratings.path, movies.path);
    CHECK(data.skipped_records == 1);
    CHECK(data.catalog.size() == 3);
    CHECK(data.catalog.find("1")->title == "toy story (1995)");
    CHECK(data.catalog.find("1")->attributes ==
          std::vector<std::string>{"animation", "children's", "comedy"});

    REQUIRE(data.sequences.size() == 2);
    const auto& u1 = data.sequences[0];
    CHECK(u1.user_id == "u1");
    CHECK(u1.events == std::vector<std::string>{"1", "3", "2"});
    // User attributes are the union of the items' attributes, sorted.
    CHECK(u1.attributes.size() == 8);
    CHECK(data.sequences[1].events == std::vector<std::string>{"3"});
}

TEST_CASE("movielens raises IngestError naming the bad line") {
    TempFile movies("t_movies2.dat", "1::Toy Story (1995)::Comedy\n");
    TempFile ratings("t_ratings2.dat", "u1::1::5::100\nbroken line\n");
    CHECK_THROWS_WITH_AS(parse_movielens(ratings.path, movies.path),
                         doctest::Contains("t_ratings2.dat:2"), IngestError);

    TempFile bad_movies("t_movies3.dat", "1::Toy Story\n");
    CHECK_THROWS_WITH_AS(parse_movielens(ratings.path, bad_movies.path),
                         doctest::Contains("t_movies3.dat:1"), IngestError);
}

TEST_CASE("amazon parsing with nested categories and skipped records") {
    TempFile meta("t_meta.jsonl",
                  R"({"asin":"A1","title":"Rose Soap","categories":[["Beauty","Bath"]],"brand":"Glow"})"
                  "\n"
                  R"({"asin":"A2","title":"Mint Shampoo","categories":["Hair Care"]})"
                  "\n"
                  R"({"title":"No Asin"})"
                  "\n");
    TempFile reviews("t_reviews.jsonl",
                     R"({"reviewerID":"r1","asin":"A1","unixReviewTime":100})"
                     "\n"
                     R"({"reviewerID":"r1","asin":"A2","unixReviewTime":200})"
                     "\n"
                     R"({"reviewerID":"r1","asin":"A9","unixReviewTime":300})"
                     "\n"
                     R"({"reviewerID":"r2","asin":"A1"})"
                     "\n");

    ParsedDataset data = parse_amazon(reviews.path, meta.path);
    CHECK(data.skipped_records == 3);  // missing asin, unknown item, missing time
    CHECK(data.catalog.size() == 2);
    CHECK(data.catalog.find("A1")->attributes ==
          std::vector<std::string>{"bath", "beauty", "glow"});
    REQUIRE(data.sequences.size() == 1);
    CHECK(data.sequences[0].events == std::vector<std::string>{"A1", "A2"});
}

TEST_CASE("compute_stats matches the definitions") {
    std::vector<InteractionSequence> seqs = {
        {"u1", {"a", "b", "c"}, {}},
        {"u2", {"b"}, {}},
        {"u3", {}, {}},  // empty sequences do not count as users
    };
    DatasetStats stats = compute_stats(seqs);
    CHECK(stats.n_users == 2);
    CHECK(stats.n_items == 3);
    CHECK(stats.n_actions == 4);
    CHECK(stats.avg_length == doctest::Approx(2.0));
    CHECK(stats.sparsity == doctest::Approx(1.0 - 4.0 / (2.0 * 3.0)));
}

TEST_CASE("leave-one-out split separates target, prefix and truncated input") {
    std::vector<InteractionSequence> seqs = {
        {"u1", {"a", "b", "c", "d", "e"}, {"x"}},
        {"u2", {"a"}, {}},  // too short, dropped
    };
    LeaveOneOutSplit split = build_split(seqs, 2);
    CHECK(split.dropped == 1);
    REQUIRE(split.users.size() == 1);
    const auto& user = split.users[0];
    CHECK(user.target == "e");
    CHECK(user.full_prefix == std::vector<std::string>{"a", "b", "c", "d"});
    CHECK(user.input == std::vector<std::string>{"c", "d"});  // most recent l_tru
    CHECK(user.attributes == std::vector<std::string>{"x"});

    CHECK_THROWS_AS(build_split(seqs, 0), std::invalid_argument);
}

TEST_CASE("iterative min-core filter converges") {
    TempFile movies("t_movies4.dat",
                    "1::A::G\n2::B::G\n3::C::G\n");
    // Item 3 has one interaction; after dropping it u2 falls under the user
    // minimum and is removed entirely.
    TempFile ratings("t_ratings4.dat",
                     "u1::1::5::1\nu1::2::5::2\nu1::1::5::3\nu1::2::5::4\n"
                     "u2::1::5::1\nu2::2::5::2\nu2::3::5::3\n");
    IngestOptions opts;
    opts.min_core_filter = true;
    opts.min_user_interactions = 4;
    opts.min_item_interactions = 2;
    ParsedDataset data = parse_movielens(ratings.path, movies.path, opts);
    REQUIRE(data.sequences.size() == 1);
    CHECK(data.sequences[0].user_id == "u1");
    CHECK(data.catalog.size() == 2);  // item 3 no longer interacted
}
