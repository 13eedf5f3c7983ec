#include "llmrg/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include "json.hpp"

namespace llmrg {

const char* task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::ChainReasoning: return "chain_reasoning";
        case TaskKind::DivergentExtension: return "divergent_extension";
        case TaskKind::AbductiveFill: return "abductive_fill";
    }
    return "chain_reasoning";
}

std::string Prompt::render() const {
    std::string out = task_description;
    out += "\n\nExample input:\n";
    out += example_input;
    out += "\n\nExample output:\n";
    out += example_output;
    out += "\n\nInput:\n";
    out += payload;
    out += "\nOutput:\n";
    return out;
}

// ---------------------------------------------------------------------------
// Prompt construction

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

Prompt build_prompt(const ChainReasoningPayload& payload) {
    if (payload.item_title.empty()) {
        throw PromptError("chain_reasoning payload missing field: item_title");
    }
    if (payload.max_chains < 1) {
        throw PromptError("chain_reasoning payload missing field: max_chains");
    }
    Prompt prompt;
    prompt.task_kind = TaskKind::ChainReasoning;
    prompt.task_description =
        "Construct reasoning chains that logically motivate the user to engage "
        "with the given item next. Link to an existing chain when a logical "
        "connection exists by writing CHAIN(LINK=<id>): instead of CHAIN:. "
        "Each chain is one line: attribute and item nodes are marked ATTR[...] "
        "and ITEM[...], the final node is TARGET[<item title>], and bare "
        "segments are concepts, joined by ' -> '.";
    prompt.example_input =
        "ITEM: star wars\n"
        "ITEM_ATTRIBUTES: sci-fi | adventure\n"
        "USER_ATTRIBUTES: sci-fi\n"
        "MAX_CHAINS: 2\n"
        "EXISTING_CHAINS: none";
    prompt.example_output =
        "CHAIN: ATTR[sci-fi] -> enjoys space opera -> TARGET[star wars]";

    std::ostringstream os;
    os << "ITEM: " << payload.item_title << "\n";
    os << "ITEM_ATTRIBUTES: "
       << (payload.item_attributes.empty() ? "none" : join(payload.item_attributes, " | "))
       << "\n";
    os << "USER_ATTRIBUTES: "
       << (payload.user_attributes.empty() ? "none" : join(payload.user_attributes, " | "))
       << "\n";
    os << "MAX_CHAINS: " << payload.max_chains << "\n";
    if (payload.existing_chains.empty()) {
        os << "EXISTING_CHAINS: none";
    } else {
        os << "EXISTING_CHAINS:";
        for (const auto& ref : payload.existing_chains) {
            os << "\n  [" << ref.id << "] " << ref.text;
        }
    }
    prompt.payload = os.str();
    return prompt;
}

Prompt build_prompt(const DivergentExtensionPayload& payload) {
    if (payload.chain_text.empty()) {
        throw PromptError("divergent_extension payload missing field: chain_text");
    }
    if (payload.max_candidates < 1) {
        throw PromptError("divergent_extension payload missing field: max_candidates");
    }
    Prompt prompt;
    prompt.task_kind = TaskKind::DivergentExtension;
    prompt.task_description =
        "Imagine plausible continuations of the reasoning chain below: name up "
        "to MAX_CANDIDATES diverse items the user is likely to engage with "
        "next, one per line as ITEM: <item title>.";
    prompt.example_input =
        "CHAIN: ATTR[sci-fi] -> enjoys space opera -> TARGET[star wars]\n"
        "MAX_CANDIDATES: 2";
    prompt.example_output =
        "ITEM: the empire strikes back\n"
        "ITEM: dune";
    std::ostringstream os;
    os << "CHAIN: " << payload.chain_text << "\n";
    os << "MAX_CANDIDATES: " << payload.max_candidates;
    prompt.payload = os.str();
    return prompt;
}

Prompt build_prompt(const AbductiveFillPayload& payload) {
    if (payload.masked_chain_text.find("[Mask]") == std::string::npos) {
        throw PromptError("abductive_fill payload missing field: masked_chain_text");
    }
    Prompt prompt;
    prompt.task_kind = TaskKind::AbductiveFill;
    prompt.task_description =
        "One node of the reasoning chain below was replaced by [Mask]. Reply "
        "with the single most reasonable fill-in for the masked node, and "
        "nothing else.";
    prompt.example_input =
        "MASKED_CHAIN: ATTR[sci-fi] -> [Mask] -> TARGET[star wars]";
    prompt.example_output = "enjoys space opera";
    prompt.payload = "MASKED_CHAIN: " + payload.masked_chain_text;
    return prompt;
}

// ---------------------------------------------------------------------------
// Chain rendering and parsing

namespace {

std::string render_node(const ChainNode& node, bool terminal) {
    if (terminal) return "TARGET[" + node.label + "]";
    switch (node.kind) {
        case NodeKind::Attribute: return "ATTR[" + node.label + "]";
        case NodeKind::Item: return "ITEM[" + node.label + "]";
        case NodeKind::Concept: return node.label;
    }
    return node.label;
}

}  // namespace

std::string render_chain_line(const ReasoningChain& chain) {
    std::string out;
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        if (i) out += " -> ";
        out += render_node(chain.nodes[i], i + 1 == chain.nodes.size());
    }
    return out;
}

std::string render_masked_chain(const ReasoningChain& chain, std::size_t mask_index) {
    std::string out;
    for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
        if (i) out += " -> ";
        const bool terminal = i + 1 == chain.nodes.size();
        if (i == mask_index) {
            ChainNode masked = chain.nodes[i];
            masked.label = "[Mask]";
            // Bare [Mask] for concepts; markers keep the grammar parseable.
            out += masked.kind == NodeKind::Concept && !terminal
                       ? "[Mask]"
                       : render_node(masked, terminal);
        } else {
            out += render_node(chain.nodes[i], terminal);
        }
    }
    return out;
}

namespace {

// Splits "a -> b -> c" into segments; returns empty on degenerate input.
std::vector<std::string> split_arrow(const std::string& text) {
    std::vector<std::string> segs;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = text.find("->", pos);
        std::string seg = text.substr(pos, next == std::string::npos ? next : next - pos);
        segs.push_back(seg);
        if (next == std::string::npos) break;
        pos = next + 2;
    }
    return segs;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Recognizes MARK[inner]; returns true and fills inner on match.
bool unwrap_marker(const std::string& seg, const char* marker, std::string& inner) {
    std::string prefix = std::string(marker) + "[";
    if (seg.rfind(prefix, 0) != 0 || seg.back() != ']') return false;
    inner = seg.substr(prefix.size(), seg.size() - prefix.size() - 1);
    return true;
}

bool parse_chain_line(const std::string& line, ReasoningChain& chain) {
    std::string body = trim(line);
    if (body.rfind("CHAIN", 0) != 0) return false;
    body = body.substr(5);
    std::int64_t parent = -1;
    if (body.rfind("(LINK=", 0) == 0) {
        std::size_t close = body.find(')');
        if (close == std::string::npos) return false;
        try {
            parent = std::stoll(body.substr(6, close - 6));
        } catch (const std::exception&) {
            return false;
        }
        body = body.substr(close + 1);
    }
    if (body.empty() || body[0] != ':') return false;
    body = body.substr(1);

    std::vector<std::string> segs = split_arrow(body);
    if (segs.size() < 2) return false;

    ReasoningChain parsed;
    parsed.parent_chain = parent;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        std::string seg = trim(segs[i]);
        if (seg.empty()) return false;
        ChainNode node;
        std::string inner;
        const bool terminal = i + 1 == segs.size();
        if (unwrap_marker(seg, "TARGET", inner)) {
            if (!terminal) return false;
            node.kind = NodeKind::Item;
        } else if (unwrap_marker(seg, "ATTR", inner)) {
            node.kind = NodeKind::Attribute;
        } else if (unwrap_marker(seg, "ITEM", inner)) {
            node.kind = NodeKind::Item;
        } else {
            if (terminal) return false;  // last node must be TARGET[...]
            node.kind = NodeKind::Concept;
            inner = seg;
        }
        auto label = canonicalize_label(inner);
        if (!label) return false;
        node.label = *label;
        parsed.nodes.push_back(std::move(node));
        if (!terminal) parsed.relations.push_back("leads to");
    }
    chain = std::move(parsed);
    return true;
}

}  // namespace

ParsedChains parse_chains(const std::string& raw_response) {
    ParsedChains out;
    std::istringstream is(raw_response);
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        ReasoningChain chain;
        if (parse_chain_line(line, chain)) {
            out.chains.push_back(std::move(chain));
        } else {
            ++out.skipped;
        }
    }
    if (out.chains.empty()) {
        throw ChainParseError("no well-formed CHAIN line in response");
    }
    return out;
}

std::vector<std::string> parse_candidates(const std::string& raw_response) {
    std::vector<std::string> out;
    std::istringstream is(raw_response);
    std::string line;
    while (std::getline(is, line)) {
        std::string body = trim(line);
        if (body.rfind("ITEM:", 0) != 0) continue;
        auto label = canonicalize_label(body.substr(5));
        if (!label) continue;
        if (std::find(out.begin(), out.end(), *label) == out.end()) {
            out.push_back(*label);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key) {
        throw BackendError("API key environment variable not set: " + config_.api_key_env);
    }
    api_key_ = key;
}

std::string HttpBackend::complete(const Prompt& prompt) {
    counters_.logical.fetch_add(1, std::memory_order_relaxed);

    nlohmann::json body = {
        {"model", config_.model},
        {"messages", {{{"role", "user"}, {"content", prompt.render()}}}},
        {"temperature", config_.temperature},
    };
    const std::string body_text = body.dump();

    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry_base_ms << (attempt - 1)));
        }
        counters_.attempts.fetch_add(1, std::memory_order_relaxed);
        auto res = client.Post("/v1/chat/completions", headers, body_text, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            auto j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded()) throw BackendError("malformed JSON in backend response");
            try {
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const std::exception&) {
                throw BackendError("unexpected response shape from backend");
            }
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "retryable status " + std::to_string(res->status);
            continue;
        }
        throw BackendError("non-retryable status " + std::to_string(res->status));
    }
    throw BackendError("retries exhausted: " + last_error);
}

}  // namespace llmrg
