#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <map>

#include "helpers.hpp"
#include "llmrg/ground.hpp"

using namespace llmrg;

TEST_CASE("char_trigrams pads with boundary markers") {
    CHECK(char_trigrams("ab") == std::vector<std::string>{"^ab", "ab$"});
    CHECK(char_trigrams("a") == std::vector<std::string>{"^a$"});
    CHECK(char_trigrams("") == std::vector<std::string>{});
    CHECK(char_trigrams("abc") == std::vector<std::string>{"^ab", "abc", "bc$"});
}

TEST_CASE("idf follows ln(1 + N/df) with out-of-corpus fallback") {
    Catalog catalog;
    catalog.add({"a", "aa", {}});
    catalog.add({"b", "ab", {}});
    catalog.add({"c", "ba", {}});
    IdfTable idf = IdfTable::build(catalog);
    // "^aa" occurs in one document of three.
    CHECK(idf.idf("^aa") == doctest::Approx(std::log(1.0 + 3.0 / 1.0)));
    CHECK(idf.idf("zzz") == doctest::Approx(std::log(1.0 + 3.0)));
}

TEST_CASE("similarity matches a hand-computed cosine") {
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);

    const std::string x = "star voyager";
    const std::string y = "star voyage";

    // Independent oracle: recompute tf-idf cosine from raw trigram counts.
    auto weights = [&](const std::string& text) {
        std::map<std::string, double> tf;
        for (const auto& g : char_trigrams(text)) tf[g] += 1.0;
        for (auto& [g, w] : tf) w *= idf.idf(g);
        return tf;
    };
    auto wx = weights(x), wy = weights(y);
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (const auto& [g, w] : wx) {
        nx += w * w;
        if (auto it = wy.find(g); it != wy.end()) dot += w * it->second;
    }
    for (const auto& [g, w] : wy) ny += w * w;
    const double expected = dot / (std::sqrt(nx) * std::sqrt(ny));

    CHECK(similarity(embed_text(x, idf), embed_text(y, idf)) == doctest::Approx(expected));
}

TEST_CASE("similarity bounds and degenerate inputs") {
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    SparseVector a = embed_text("star voyager", idf);
    CHECK(similarity(a, a) == doctest::Approx(1.0));
    CHECK(similarity(a, embed_text("qqq", idf)) == 0.0);
    CHECK(similarity(a, SparseVector{}) == 0.0);
}

TEST_CASE("title index retrieves exact match first and breaks ties by id") {
    Catalog catalog;
    catalog.add({"b2", "same title", {}});
    catalog.add({"a1", "same title", {}});
    catalog.add({"c3", "unrelated words", {}});
    IdfTable idf = IdfTable::build(catalog);
    TitleIndex index(catalog, idf);

    auto top = index.retrieve_top_k("same title", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].item_id == "a1");  // equal scores, ascending id
    CHECK(top[1].item_id == "b2");
    CHECK(top[0].score == doctest::Approx(1.0));

    CHECK(index.retrieve_top_k("same title", 10).size() == 3);  // k clamped
}

TEST_CASE("idf table file round trip") {
    Catalog catalog = testfix::small_catalog();
    IdfTable idf = IdfTable::build(catalog);
    const std::string path = "idf_roundtrip.json";
    write_idf_table(path, idf);
    IdfTable back = read_idf_table(path);
    CHECK(back.corpus_size() == idf.corpus_size());
    CHECK(back.doc_freq() == idf.doc_freq());
    CHECK(back.idf("^st") == doctest::Approx(idf.idf("^st")));
    std::remove(path.c_str());
}
