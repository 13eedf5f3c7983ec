#include "llmrg/kbase.hpp"

#include <fstream>
#include <stdexcept>

#include "llmrg/serialize.hpp"

namespace llmrg {

KnowledgeBase::KnowledgeBase(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("cache capacity must be positive");
}

std::optional<ReasoningChain> KnowledgeBase::lookup(const Signature& signature) {
    std::lock_guard<std::mutex> lock(mutex_);
    ++step_;
    ++telemetry_.lookups;
    auto it = entries_.find(signature);
    if (it == entries_.end()) {
        ++telemetry_.calls;
        miss_log_.push_back(1);
        return std::nullopt;
    }
    ++telemetry_.hits;
    miss_log_.push_back(0);
    it->second.hit_count += 1;
    it->second.last_hit_step = step_;
    auto rec = recency_index_.find(signature);
    recency_.splice(recency_.begin(), recency_, rec->second);
    ReasoningChain chain = it->second.chain;
    chain.origin = ChainOrigin::Cached;
    return chain;
}

bool KnowledgeBase::insert(const Signature& signature, const ReasoningChain& chain,
                           int score, int tau) {
    std::lock_guard<std::mutex> lock(mutex_);
    return insert_locked(signature, chain, score, tau, true);
}

bool KnowledgeBase::insert_locked(const Signature& signature, const ReasoningChain& chain,
                                  int score, int tau, bool journal) {
    if (score < tau) return false;
    ++step_;
    auto it = entries_.find(signature);
    if (it != entries_.end()) {
        // Refresh the existing entry; recency bumps as a use.
        it->second.chain = chain;
        it->second.score = score;
        recency_.splice(recency_.begin(), recency_, recency_index_[signature]);
        return true;
    }
    if (entries_.size() >= capacity_) {
        const Signature victim = recency_.back();
        recency_.pop_back();
        recency_index_.erase(victim);
        entries_.erase(victim);
    }
    KnowledgeBaseEntry entry;
    entry.signature = signature;
    entry.chain = chain;
    entry.score = score;
    entry.insert_step = step_;
    entries_[signature] = std::move(entry);
    recency_.push_front(signature);
    recency_index_[signature] = recency_.begin();

    if (journal && !journal_path_.empty()) {
        std::ofstream os(journal_path_, std::ios::app);
        if (!os) throw std::runtime_error("cannot append to cache journal: " + journal_path_);
        nlohmann::json rec = {{"signature", signature.hex()},
                              {"chain", chain_to_json(chain)},
                              {"score", score},
                              {"insert_step", step_}};
        os << rec.dump() << "\n";
    }
    return true;
}

CacheTelemetry KnowledgeBase::stats() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return telemetry_;
}

std::size_t KnowledgeBase::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::vector<std::pair<std::uint64_t, double>> KnowledgeBase::windowed_access_frequency(
    std::size_t window) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (window == 0) throw std::invalid_argument("window must be positive");
    std::vector<std::pair<std::uint64_t, double>> out;
    out.reserve(miss_log_.size());
    std::size_t misses_in_window = 0;
    for (std::size_t i = 0; i < miss_log_.size(); ++i) {
        misses_in_window += miss_log_[i];
        if (i >= window) misses_in_window -= miss_log_[i - window];
        const std::size_t span = std::min(i + 1, window);
        out.emplace_back(i + 1, static_cast<double>(misses_in_window) / span);
    }
    return out;
}

void KnowledgeBase::attach_journal(const std::string& path) {
    std::lock_guard<std::mutex> lock(mutex_);
    journal_path_ = path;
}

void KnowledgeBase::load(const std::string& path, int tau) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open cache journal: " + path);
    std::lock_guard<std::mutex> lock(mutex_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded()) {
            throw std::runtime_error("malformed cache journal line " + std::to_string(line_no));
        }
        auto signature = Signature::from_hex(rec.at("signature").get<std::string>());
        if (!signature) {
            throw std::runtime_error("bad signature in cache journal line " +
                                     std::to_string(line_no));
        }
        insert_locked(*signature, chain_from_json(rec.at("chain")),
                      rec.at("score").get<int>(), tau, false);
    }
}

}  // namespace llmrg
