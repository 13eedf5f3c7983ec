#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "helpers.hpp"
#include "llmrg/ground.hpp"
#include "llmrg/mock_oracle.hpp"
#include "llmrg/verify.hpp"

using namespace llmrg;

TEST_CASE("mask_chain picks item and attribute nodes uniformly") {
    ReasoningChain chain;
    chain.nodes = {{NodeKind::Attribute, "sci-fi", ""},
                   {NodeKind::Concept, "space opera", ""},
                   {NodeKind::Item, "star voyager", "m1"},
                   {NodeKind::Item, "nebula dawn", "m2"}};
    chain.relations = {"leads to", "leads to", "extends to"};
    chain.target_item = "m2";

    std::mt19937_64 rng(99);
    std::map<std::size_t, int> counts;
    const int trials = 30000;
    for (int i = 0; i < trials; ++i) {
        auto masked = mask_chain(chain, rng);
        REQUIRE(masked.has_value());
        ++counts[masked->mask_index];
    }
    REQUIRE(counts.size() == 3);  // indices 0, 2, 3; the concept is never masked
    CHECK(counts.count(1) == 0);
    for (const auto& [index, count] : counts) {
        const double freq = static_cast<double>(count) / trials;
        CHECK(freq == doctest::Approx(1.0 / 3.0).epsilon(0.06));  // within ~0.02 absolute
    }
}

TEST_CASE("mask_chain reports concept-only chains as unmaskable") {
    ReasoningChain chain;
    chain.nodes = {{NodeKind::Concept, "a", ""}, {NodeKind::Concept, "b", ""}};
    std::mt19937_64 rng(1);
    CHECK_FALSE(mask_chain(chain, rng).has_value());
}

TEST_CASE("score_match forces 100 on exact equality, else rounded cosine") {
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    CHECK(score_match("star voyager", "star voyager", idf) == 100);
    CHECK(score_match("xyz", "star voyager", idf) == 0);

    const double cos =
        similarity(embed_text("star voyage", idf), embed_text("star voyager", idf));
    CHECK(score_match("star voyage", "star voyager", idf) ==
          static_cast<int>(std::lround(100.0 * cos)));
}

TEST_CASE("filter_chains keeps scores at the threshold (inclusive)") {
    std::vector<ReasoningChain> chains(3);
    chains[0].id = 0;
    chains[0].score = 29;
    chains[1].id = 1;
    chains[1].score = 30;
    chains[2].id = 2;
    chains[2].score = 100;
    FilterResult result = filter_chains(chains, 30);
    REQUIRE(result.retained.size() == 2);
    CHECK(result.retained[0].id == 1);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].chain_id == 0);
    CHECK(result.rejected[0].threshold == 30);
}

TEST_CASE("verify_chain scores 100 against a perfect-fidelity oracle") {
    MockBackend backend({testfix::small_table(), 1.0, 1});
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    ReasoningChain chain =
        testfix::simple_chain(0, "sci-fi", "a taste for sci-fi", "nebula dawn", "m2");

    std::mt19937_64 rng(5);
    VerifyOutcome outcome = verify_chain(chain, backend, idf, rng);
    CHECK_FALSE(outcome.unverifiable);
    CHECK(outcome.score == 100);
    CHECK(outcome.prediction == outcome.masked_node);
}

TEST_CASE("verify_chain scores decoys below 100 at fidelity 0") {
    MockBackend backend({testfix::small_table(), 0.0, 1});
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    ReasoningChain chain =
        testfix::simple_chain(0, "sci-fi", "a taste for sci-fi", "nebula dawn", "m2");

    std::mt19937_64 rng(5);
    VerifyOutcome outcome = verify_chain(chain, backend, idf, rng);
    CHECK_FALSE(outcome.unverifiable);
    CHECK(outcome.score < 100);
    CHECK(outcome.prediction != outcome.masked_node);
}

TEST_CASE("verify_chain flags unmaskable chains") {
    MockBackend backend({testfix::small_table(), 1.0, 1});
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    ReasoningChain chain;
    chain.nodes = {{NodeKind::Concept, "a", ""}, {NodeKind::Concept, "b", ""}};
    std::mt19937_64 rng(5);
    VerifyOutcome outcome = verify_chain(chain, backend, idf, rng);
    CHECK(outcome.unverifiable);
    CHECK(outcome.score == 0);
}
