#include "llmrg/ground.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "llmrg/serialize.hpp"

namespace llmrg {

std::vector<std::string> char_trigrams(const std::string& text) {
    if (text.empty()) return {};
    std::string padded = "^" + text + "$";
    if (padded.size() < 3) return {padded};
    std::vector<std::string> grams;
    grams.reserve(padded.size() - 2);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        grams.push_back(padded.substr(i, 3));
    }
    return grams;
}

IdfTable IdfTable::build(const Catalog& catalog) {
    IdfTable table;
    table.corpus_size_ = catalog.items.size();
    for (const auto& item : catalog.items) {
        std::set<std::string> seen;
        for (auto& gram : char_trigrams(item.title)) seen.insert(std::move(gram));
        for (const auto& gram : seen) ++table.doc_freq_[gram];
    }
    return table;
}

double IdfTable::idf(const std::string& gram) const {
    const double n = static_cast<double>(corpus_size_);
    auto it = doc_freq_.find(gram);
    if (it == doc_freq_.end()) return std::log(1.0 + n);
    return std::log(1.0 + n / static_cast<double>(it->second));
}

IdfTable IdfTable::from_parts(std::map<std::string, std::size_t> doc_freq,
                              std::size_t corpus_size) {
    IdfTable table;
    table.doc_freq_ = std::move(doc_freq);
    table.corpus_size_ = corpus_size;
    return table;
}

SparseVector embed_text(const std::string& text, const IdfTable& idf) {
    SparseVector vec;
    std::map<std::string, std::size_t> tf;
    for (auto& gram : char_trigrams(text)) ++tf[gram];
    double sq = 0.0;
    for (const auto& [gram, count] : tf) {
        const double w = static_cast<double>(count) * idf.idf(gram);
        vec.weights[gram] = w;
        sq += w * w;
    }
    vec.norm = std::sqrt(sq);
    return vec;
}

double similarity(const SparseVector& a, const SparseVector& b) {
    if (a.zero() || b.zero()) return 0.0;
    const SparseVector& small = a.weights.size() <= b.weights.size() ? a : b;
    const SparseVector& large = a.weights.size() <= b.weights.size() ? b : a;
    double dot = 0.0;
    for (const auto& [gram, w] : small.weights) {
        auto it = large.weights.find(gram);
        if (it != large.weights.end()) dot += w * it->second;
    }
    double cos = dot / (a.norm * b.norm);
    return std::clamp(cos, 0.0, 1.0);
}

TitleIndex::TitleIndex(const Catalog& catalog, const IdfTable& idf)
    : catalog_(&catalog), idf_(&idf) {
    title_vectors_.reserve(catalog.items.size());
    for (const auto& item : catalog.items) {
        title_vectors_.push_back(embed_text(item.title, idf));
    }
}

std::vector<ScoredItem> TitleIndex::retrieve_top_k(const std::string& text,
                                                   std::size_t k) const {
    SparseVector query = embed_text(text, *idf_);
    std::vector<ScoredItem> scored;
    scored.reserve(catalog_->items.size());
    for (std::size_t i = 0; i < catalog_->items.size(); ++i) {
        scored.push_back({catalog_->items[i].id, similarity(query, title_vectors_[i])});
    }
    k = std::min(k, scored.size());
    std::sort(scored.begin(), scored.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    scored.resize(k);
    return scored;
}

void write_idf_table(const std::string& path, const IdfTable& table) {
    nlohmann::json df = nlohmann::json::object();
    for (const auto& [gram, count] : table.doc_freq()) df[gram] = count;
    write_json_file(path, {{"corpus_size", table.corpus_size()}, {"doc_freq", df}});
}

IdfTable read_idf_table(const std::string& path) {
    auto j = read_json_file(path);
    std::map<std::string, std::size_t> doc_freq;
    for (auto& [gram, count] : j.at("doc_freq").items()) {
        doc_freq[gram] = count.get<std::size_t>();
    }
    return IdfTable::from_parts(std::move(doc_freq), j.at("corpus_size").get<std::size_t>());
}

}  // namespace llmrg
