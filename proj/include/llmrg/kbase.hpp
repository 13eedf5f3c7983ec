// Signature-keyed cache of validated reasoning chains. Consulted before any
// backend call; hits return the cached chain without touching the model.
// Entries are gated by score at insert time and evicted LRU at capacity.
//
// All operations take one lock, so interleaved lookups and inserts from many
// threads are linearizable.

#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "llmrg/domain.hpp"

namespace llmrg {

struct KnowledgeBaseEntry {
    Signature signature;
    ReasoningChain chain;
    int score = 0;
    std::uint64_t insert_step = 0;
    std::uint64_t hit_count = 0;
    std::uint64_t last_hit_step = 0;
};

struct CacheTelemetry {
    std::uint64_t lookups = 0;
    std::uint64_t hits = 0;
    std::uint64_t calls = 0;  // misses; each one costs a backend call upstream
};

class KnowledgeBase {
public:
    explicit KnowledgeBase(std::size_t capacity = 100000);

    // Hit returns the cached chain (origin rewritten to Cached) and bumps
    // recency; miss counts one prospective backend call.
    std::optional<ReasoningChain> lookup(const Signature& signature);

    // Accepted iff score >= tau (inclusive). At capacity the least recently
    // hit entry is evicted first.
    bool insert(const Signature& signature, const ReasoningChain& chain, int score, int tau);

    CacheTelemetry stats() const;
    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }

    // (step, average backend calls per step) over a sliding window, one row
    // per lookup step. This is what the cache-stats CSV plots.
    std::vector<std::pair<std::uint64_t, double>> windowed_access_frequency(
        std::size_t window) const;

    // Append-only persistence: every accepted insert is journaled to the
    // attached file; load() replays a journal written earlier.
    void attach_journal(const std::string& path);
    void load(const std::string& path, int tau);

private:
    bool insert_locked(const Signature& signature, const ReasoningChain& chain,
                       int score, int tau, bool journal);

    mutable std::mutex mutex_;
    std::size_t capacity_;
    std::map<Signature, KnowledgeBaseEntry> entries_;
    std::list<Signature> recency_;  // most recently used at front
    std::map<Signature, std::list<Signature>::iterator> recency_index_;
    CacheTelemetry telemetry_;
    std::uint64_t step_ = 0;
    std::vector<char> miss_log_;  // 1 per lookup that missed, in step order
    std::string journal_path_;
};

}  // namespace llmrg
