// Deterministic lexical similarity over padded character 3-grams with tf-idf
// weighting, plus exact top-k retrieval against catalog titles. Used to score
// abductive fills and to ground generated item texts to real catalog entries.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "llmrg/domain.hpp"

namespace llmrg {

struct SparseVector {
    std::map<std::string, double> weights;  // 3-gram -> tf*idf, all >= 0
    double norm = 0.0;                      // cached L2 norm

    bool zero() const { return norm == 0.0; }
};

// idf = ln(1 + N/df), computed over the catalog-title corpus. Unseen grams
// fall back to the out-of-corpus idf ln(1 + N).
class IdfTable {
public:
    IdfTable() = default;
    static IdfTable build(const Catalog& catalog);

    double idf(const std::string& gram) const;
    std::size_t corpus_size() const { return corpus_size_; }
    const std::map<std::string, std::size_t>& doc_freq() const { return doc_freq_; }

    static IdfTable from_parts(std::map<std::string, std::size_t> doc_freq,
                               std::size_t corpus_size);

private:
    std::map<std::string, std::size_t> doc_freq_;
    std::size_t corpus_size_ = 0;
};

// Padded character 3-grams of a canonical label: "ab" -> {"^ab", "ab$"}.
std::vector<std::string> char_trigrams(const std::string& text);

SparseVector embed_text(const std::string& text, const IdfTable& idf);

// Cosine similarity in [0,1]; a zero vector against anything gives 0.
double similarity(const SparseVector& a, const SparseVector& b);

struct ScoredItem {
    std::string item_id;
    double score = 0.0;
};

// Precomputes title vectors once; queries are then read-only and safe to run
// in parallel.
class TitleIndex {
public:
    TitleIndex(const Catalog& catalog, const IdfTable& idf);

    // Exact top-k by cosine, ties broken by ascending item id. k is clamped
    // to the catalog size.
    std::vector<ScoredItem> retrieve_top_k(const std::string& text, std::size_t k) const;

    const IdfTable& idf() const { return *idf_; }

private:
    const Catalog* catalog_;
    const IdfTable* idf_;
    std::vector<SparseVector> title_vectors_;
};

// Flat-file round trip for reuse across runs.
void write_idf_table(const std::string& path, const IdfTable& table);
IdfTable read_idf_table(const std::string& path);

}  // namespace llmrg
