#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include "json.hpp"

#include "helpers.hpp"
#include "llmrg/llm.hpp"

using namespace llmrg;

TEST_CASE("prompt renders sections in fixed order") {
    Prompt prompt;
    prompt.task_description = "DESC";
    prompt.example_input = "EX_IN";
    prompt.example_output = "EX_OUT";
    prompt.payload = "PAYLOAD";
    const std::string text = prompt.render();
    const auto d = text.find("DESC");
    const auto ei = text.find("Example input:\nEX_IN");
    const auto eo = text.find("Example output:\nEX_OUT");
    const auto in = text.find("Input:\nPAYLOAD");
    const auto out = text.find("Output:");
    REQUIRE(d != std::string::npos);
    CHECK(d < ei);
    CHECK(ei < eo);
    CHECK(eo < in);
    CHECK(in < out);
}

TEST_CASE("chain reasoning payload lists fields and existing chains") {
    ChainReasoningPayload payload;
    payload.item_title = "star voyager";
    payload.item_attributes = {"sci-fi", "adventure"};
    payload.user_attributes = {};
    payload.max_chains = 2;
    payload.existing_chains = {{7, "ATTR[sci-fi] -> x -> TARGET[nebula dawn]"}};
    Prompt prompt = build_prompt(payload);
    CHECK(prompt.task_kind == TaskKind::ChainReasoning);
    CHECK(prompt.payload.find("ITEM: star voyager") != std::string::npos);
    CHECK(prompt.payload.find("ITEM_ATTRIBUTES: sci-fi | adventure") != std::string::npos);
    CHECK(prompt.payload.find("USER_ATTRIBUTES: none") != std::string::npos);
    CHECK(prompt.payload.find("MAX_CHAINS: 2") != std::string::npos);
    CHECK(prompt.payload.find("[7] ATTR[sci-fi]") != std::string::npos);
}

TEST_CASE("prompt builders reject incomplete payloads") {
    CHECK_THROWS_AS(build_prompt(ChainReasoningPayload{}), PromptError);
    CHECK_THROWS_AS(build_prompt(DivergentExtensionPayload{}), PromptError);
    CHECK_THROWS_AS(build_prompt(AbductiveFillPayload{"no mask here"}), PromptError);
}

TEST_CASE("render_chain_line round trips through parse_chains") {
    ReasoningChain chain =
        testfix::simple_chain(0, "sci-fi", "enjoys space opera", "star voyager", "m1");
    const std::string line = render_chain_line(chain);
    CHECK(line == "ATTR[sci-fi] -> enjoys space opera -> TARGET[star voyager]");

    ParsedChains parsed = parse_chains("CHAIN: " + line + "\n");
    REQUIRE(parsed.chains.size() == 1);
    const ReasoningChain& back = parsed.chains[0];
    REQUIRE(back.nodes.size() == 3);
    CHECK(back.nodes[0].kind == NodeKind::Attribute);
    CHECK(back.nodes[1].kind == NodeKind::Concept);
    CHECK(back.nodes[2].kind == NodeKind::Item);
    CHECK(back.nodes[2].label == "star voyager");
    CHECK(back.relations == std::vector<std::string>{"leads to", "leads to"});
}

TEST_CASE("render_masked_chain marks the chosen node") {
    ReasoningChain chain =
        testfix::simple_chain(0, "sci-fi", "enjoys space opera", "star voyager", "m1");
    CHECK(render_masked_chain(chain, 0) ==
          "ATTR[[Mask]] -> enjoys space opera -> TARGET[star voyager]");
    CHECK(render_masked_chain(chain, 1) == "ATTR[sci-fi] -> [Mask] -> TARGET[star voyager]");
    CHECK(render_masked_chain(chain, 2) == "ATTR[sci-fi] -> enjoys space opera -> TARGET[[Mask]]");
}

TEST_CASE("parse_chains handles links, skips malformed lines, throws when empty") {
    ParsedChains parsed = parse_chains(
        "CHAIN(LINK=4): ATTR[drama] -> slow burn -> TARGET[quiet rivers]\n"
        "garbage line\n"
        "CHAIN: missing target -> no marker\n");
    CHECK(parsed.chains.size() == 1);
    CHECK(parsed.skipped == 2);
    CHECK(parsed.chains[0].parent_chain == 4);

    CHECK_THROWS_AS(parse_chains("nothing valid at all"), ChainParseError);
    CHECK_THROWS_AS(parse_chains(""), ChainParseError);
}

TEST_CASE("parse_chains requires a terminal TARGET and mid-chain markers work") {
    ParsedChains parsed = parse_chains(
        "CHAIN: ATTR[sci-fi] -> space opera -> ITEM[star voyager] -> TARGET[nebula dawn]\n");
    REQUIRE(parsed.chains.size() == 1);
    CHECK(parsed.chains[0].nodes.size() == 4);
    CHECK(parsed.chains[0].nodes[2].kind == NodeKind::Item);

    // TARGET not in last position is malformed.
    CHECK_THROWS_AS(parse_chains("CHAIN: TARGET[early] -> trailing concept"),
                    ChainParseError);
}

TEST_CASE("parse_candidates dedupes and canonicalizes") {
    auto items = parse_candidates(
        "ITEM: Star Voyager\nITEM:  star   voyager \nnoise\nITEM: nebula dawn\n");
    CHECK(items == std::vector<std::string>{"star voyager", "nebula dawn"});
    CHECK(parse_candidates("no items").empty());
}

namespace {

struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    explicit StubServer(int fail_first_n, int fail_status) {
        server.Post("/v1/chat/completions",
                    [this, fail_first_n, fail_status](const httplib::Request& req,
                                                      httplib::Response& res) {
                        const int n = ++hits;
                        if (req.get_header_value("Authorization").rfind("Bearer ", 0) != 0) {
                            res.status = 401;
                            return;
                        }
                        if (n <= fail_first_n) {
                            res.status = fail_status;
                            return;
                        }
                        nlohmann::json body = {
                            {"choices",
                             {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
                        res.set_content(body.dump(), "application/json");
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~StubServer() {
        server.stop();
        thread.join();
    }
};

Prompt ping_prompt() {
    Prompt prompt;
    prompt.task_description = "ping";
    prompt.payload = "ping";
    return prompt;
}

}  // namespace

TEST_CASE("http backend retries 429 with backoff and then succeeds") {
    StubServer stub(2, 429);
    setenv("LLMRG_API_KEY", "test-key", 1);
    BackendConfig config;
    config.kind = BackendKind::Http;
    config.endpoint = "http://127.0.0.1:" + std::to_string(stub.port);
    config.retry_base_ms = 1;
    HttpBackend backend(config);

    CHECK(backend.complete(ping_prompt()) == "pong");
    CHECK(stub.hits.load() == 3);
    CHECK(backend.counters().logical.load() == 1);
    CHECK(backend.counters().attempts.load() == 3);
}

TEST_CASE("http backend fails fast on non-retryable 4xx") {
    StubServer stub(5, 400);
    setenv("LLMRG_API_KEY", "test-key", 1);
    BackendConfig config;
    config.kind = BackendKind::Http;
    config.endpoint = "http://127.0.0.1:" + std::to_string(stub.port);
    config.retry_base_ms = 1;
    HttpBackend backend(config);

    CHECK_THROWS_AS(backend.complete(ping_prompt()), BackendError);
    CHECK(stub.hits.load() == 1);
}

TEST_CASE("http backend gives up after max retries on 5xx") {
    StubServer stub(100, 503);
    setenv("LLMRG_API_KEY", "test-key", 1);
    BackendConfig config;
    config.kind = BackendKind::Http;
    config.endpoint = "http://127.0.0.1:" + std::to_string(stub.port);
    config.max_retries = 2;
    config.retry_base_ms = 1;
    HttpBackend backend(config);

    CHECK_THROWS_AS(backend.complete(ping_prompt()), BackendError);
    CHECK(stub.hits.load() == 3);  // initial attempt + 2 retries
}

TEST_CASE("http backend requires the API key environment variable") {
    unsetenv("LLMRG_API_KEY");
    BackendConfig config;
    config.kind = BackendKind::Http;
    config.endpoint = "http://127.0.0.1:1";
    CHECK_THROWS_AS(HttpBackend{config}, BackendError);
    setenv("LLMRG_API_KEY", "test-key", 1);
}
