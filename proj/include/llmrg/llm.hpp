// Language-model plumbing: prompt construction, the pluggable backend
// interface, and structured parsing of backend responses.
//
// All three prompt-using stages speak a single-line chain grammar:
//
//   CHAIN: ATTR[sci-fi] -> enjoys space opera -> TARGET[star wars]
//   CHAIN(LINK=12): ATTR[sci-fi] -> ... -> TARGET[alien]
//
// Non-terminal item nodes (they appear in divergent extension chains) are
// rendered as ITEM[label]; bare segments are concepts. Divergent extension
// responses use one "ITEM: <text>" line per candidate. A masked node is
// rendered with the literal token [Mask] in place of its label.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "llmrg/domain.hpp"

namespace llmrg {

enum class TaskKind { ChainReasoning, DivergentExtension, AbductiveFill };

const char* task_kind_name(TaskKind kind);

struct Prompt {
    TaskKind task_kind = TaskKind::ChainReasoning;
    std::string task_description;
    std::string example_input;
    std::string example_output;
    std::string payload;

    // Fixed order: description, example input, example output, payload.
    std::string render() const;
};

struct PromptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChainParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BackendKind { Mock, Http };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string endpoint;            // base url, e.g. http://localhost:8080
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_retries = 3;
    int timeout_ms = 30000;
    int parallelism = 1;             // max in-flight requests
    std::string api_key_env = "LLMRG_API_KEY";
    int retry_base_ms = 250;         // exponential backoff base
};

// Telemetry shared by all backends. "logical" counts one per completion that
// reached a backend (this is what the cache-reuse accounting consumes);
// "attempts" additionally counts transport retries.
struct AccessCounters {
    std::atomic<std::uint64_t> logical{0};
    std::atomic<std::uint64_t> attempts{0};
};

class Backend {
public:
    virtual ~Backend() = default;

    // Returns raw response text. Throws BackendError on unrecoverable
    // failure (retries exhausted, non-retryable status).
    virtual std::string complete(const Prompt& prompt) = 0;

    const AccessCounters& counters() const { return counters_; }

protected:
    AccessCounters counters_;
};

// OpenAI-compatible chat endpoint: POST {endpoint}/v1/chat/completions.
// Retries 429 and 5xx with exponential backoff; other 4xx fail immediately.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig config);
    std::string complete(const Prompt& prompt) override;

private:
    BackendConfig config_;
    std::string api_key_;
};

// ---------------------------------------------------------------------------
// Prompt construction

struct ExistingChainRef {
    std::int64_t id = -1;
    std::string text;  // rendered chain line, without the CHAIN: prefix
};

struct ChainReasoningPayload {
    std::string item_title;
    std::vector<std::string> item_attributes;
    std::vector<std::string> user_attributes;
    std::vector<ExistingChainRef> existing_chains;  // stable id order
    int max_chains = 3;
};

struct DivergentExtensionPayload {
    std::string chain_text;
    int max_candidates = 3;
};

struct AbductiveFillPayload {
    std::string masked_chain_text;  // contains exactly one [Mask]
};

Prompt build_prompt(const ChainReasoningPayload& payload);
Prompt build_prompt(const DivergentExtensionPayload& payload);
Prompt build_prompt(const AbductiveFillPayload& payload);

// ---------------------------------------------------------------------------
// Chain text rendering and parsing

// "ATTR[sci-fi] -> enjoys space opera -> TARGET[star wars]"
std::string render_chain_line(const ReasoningChain& chain);

// Same, with the node at mask_index rendered as [Mask].
std::string render_masked_chain(const ReasoningChain& chain, std::size_t mask_index);

struct ParsedChains {
    std::vector<ReasoningChain> chains;  // unscored, labels canonicalized
    int skipped = 0;                     // malformed lines
};

// Parses CHAIN lines. Throws ChainParseError when no line is well-formed.
ParsedChains parse_chains(const std::string& raw_response);

// Parses ITEM lines from a divergent-extension response, deduplicated in
// first-seen order.
std::vector<std::string> parse_candidates(const std::string& raw_response);

}  // namespace llmrg
