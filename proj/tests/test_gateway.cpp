#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "halodet/core/error.hpp"
#include "halodet/gateway/http.hpp"
#include "halodet/gateway/mock.hpp"
#include "halodet/gateway/token_scoring.hpp"

using namespace halodet;
using nlohmann::json;

namespace {

std::vector<json> script_paris() {
    return {
        json{{"match", "capital of France"},
             {"response", "Paris is the capital of France."},
             {"tokens",
              json::array({json{{"text", "Paris"},
                                {"logprob", std::log(0.5)},
                                {"top", json::array({json::array({"Paris", std::log(0.5)}),
                                                     json::array({"Lyon", std::log(0.5)})})}}})}},
    };
}

} // namespace

TEST_SUITE("gateway") {

TEST_CASE("mock replays scripted replies and is deterministic") {
    auto backend = gateway::MockBackend::from_records(script_paris(), 11);
    gateway::GenerationRequest request;
    request.messages = {{"user", "What is the capital of France?"}};
    request.top_logprobs = 2;

    const auto a = backend->generate(request);
    CHECK(a.text == "Paris is the capital of France.");
    REQUIRE(a.tokens.size() == 1);
    CHECK(a.tokens[0].logprob == doctest::Approx(std::log(0.5)));

    const auto b = backend->generate(request);
    CHECK(a.text == b.text);

    // greedy determinism holds for unscripted prompts too
    gateway::GenerationRequest other;
    other.messages = {{"user", "something unscripted"}};
    CHECK(backend->generate(other).text == backend->generate(other).text);
}

TEST_CASE("mock scripted failure surfaces as a backend error") {
    auto backend = gateway::MockBackend::from_records(
        {json{{"match", "broken"}, {"fail", "scripted outage"}}});
    gateway::GenerationRequest request;
    request.messages = {{"user", "this is broken"}};
    try {
        backend->generate(request);
        FAIL("expected backend error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::backend);
    }
}

TEST_CASE("score_tokens maps logprobs to probabilities") {
    auto backend = gateway::MockBackend::from_records(script_paris());
    const auto scored = backend->score_tokens("", "the capital of France");
    REQUIRE(scored.tokens.size() == 1);
    CHECK(scored.tokens[0].probability == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("score_tokens yields one record per whitespace token") {
    auto backend = gateway::MockBackend::from_records({});
    const auto scored = backend->score_tokens("ctx", "one two three four five six seven");
    CHECK(scored.tokens.size() == 7);
    for (const auto& t : scored.tokens) {
        CHECK(t.probability > 0.0);
        CHECK(t.probability <= 1.0);
        CHECK(t.entropy >= 0.0);
    }
    // pure function of the script and seed
    const auto again = backend->score_tokens("ctx", "one two three four five six seven");
    CHECK(scored.tokens == again.tokens);
}

TEST_CASE("entropy of a uniform 4-candidate distribution is ln 4") {
    std::vector<gateway::TokenCandidate> candidates;
    for (int i = 0; i < 4; ++i) {
        candidates.push_back({"t" + std::to_string(i), std::log(0.25)});
    }
    bool truncated = true;
    const double entropy =
        gateway::entropy_from_candidates(candidates, std::nullopt, &truncated);
    CHECK(entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK_FALSE(truncated); // full mass covered
}

TEST_CASE("truncated entropy flags missing mass without a vocab size") {
    std::vector<gateway::TokenCandidate> candidates{{"a", std::log(0.5)},
                                                    {"b", std::log(0.25)}};
    bool truncated = false;
    const double without_vocab =
        gateway::entropy_from_candidates(candidates, std::nullopt, &truncated);
    CHECK(truncated);

    // with a vocabulary the tail is spread uniformly over the rest
    truncated = false;
    const double with_vocab = gateway::entropy_from_candidates(candidates, 6, &truncated);
    CHECK_FALSE(truncated);
    const double tail = 0.25;
    const double expected = without_vocab - tail * std::log(tail / 4.0);
    CHECK(with_vocab == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sample_n returns scripted variants in index order") {
    std::vector<json> records{
        json{{"match", "write a story"},
             {"samples", json::array({"v0", "v1", "v2", "v3", "v4"})}}};
    auto backend = gateway::MockBackend::from_records(records);
    gateway::GenerationRequest request;
    request.messages = {{"user", "write a story"}};
    request.temperature = 1.0;

    const auto results = gateway::sample_n(*backend, request, 5, 3);
    REQUIRE(results.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(results[static_cast<std::size_t>(i)].text == "v" + std::to_string(i));
    }
}

TEST_CASE("sample_n with n = 1 equals a single generate call") {
    std::vector<json> records{
        json{{"match", "write a story"}, {"samples", json::array({"v0", "v1"})}}};
    auto backend = gateway::MockBackend::from_records(records);
    gateway::GenerationRequest request;
    request.messages = {{"user", "write a story"}};
    request.temperature = 1.0;
    const auto sampled = gateway::sample_n(*backend, request, 1);
    REQUIRE(sampled.size() == 1);
    gateway::GenerationRequest direct = request;
    direct.sample_index = 0;
    CHECK(sampled[0].text == backend->generate(direct).text);
}

TEST_CASE("sample_n rejects temperature zero and n below one") {
    auto backend = gateway::MockBackend::from_records({});
    gateway::GenerationRequest request;
    request.messages = {{"user", "x"}};
    request.temperature = 0.0;
    CHECK_THROWS_AS(gateway::sample_n(*backend, request, 3), Error);
    request.temperature = 1.0;
    CHECK_THROWS_AS(gateway::sample_n(*backend, request, 0), Error);
}

TEST_CASE("sample_n reports failed indices without truncation") {
    std::vector<json> records{json{{"match", "write a story"},
                                   {"samples", json::array({"a", "b"})},
                                   {"fail_indices", json::array({7})},
                                   {"fail", "index seven is cursed"}}};
    auto backend = gateway::MockBackend::from_records(records);
    gateway::GenerationRequest request;
    request.messages = {{"user", "write a story"}};
    request.temperature = 1.0;
    try {
        gateway::sample_n(*backend, request, 20, 4);
        FAIL("expected partial failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::backend);
        CHECK(std::string(e.what()).find("[7 ") != std::string::npos);
        CHECK(std::string(e.what()).find("1 of 20") != std::string::npos);
    }
}

TEST_CASE("a backend without completion scoring names itself in the capability error") {
    std::vector<json> records{json{{"config", {{"completion_scoring", false}}}}};
    auto backend = gateway::MockBackend::from_records(records);
    try {
        backend->score_tokens("", "some continuation");
        FAIL("expected capability error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::capability);
        CHECK(std::string(e.what()).find("mock") != std::string::npos);
    }
}

TEST_CASE("generated top candidates are sorted descending by logprob") {
    auto backend = gateway::MockBackend::from_records({});
    gateway::GenerationRequest request;
    request.messages = {{"user", "anything unscripted at all"}};
    request.top_logprobs = 5;
    const auto result = backend->generate(request);
    for (const auto& tok : result.tokens) {
        for (std::size_t i = 1; i < tok.top_candidates.size(); ++i) {
            CHECK(tok.top_candidates[i - 1].logprob >= tok.top_candidates[i].logprob);
        }
        CHECK(std::exp(tok.logprob) > 0.0);
        CHECK(std::exp(tok.logprob) <= 1.0);
    }
}

TEST_CASE("mock hidden states have the configured shape and are deterministic") {
    std::vector<json> records{
        json{{"config", {{"hidden_layers", 4}, {"hidden_width", 8}}}}};
    auto backend = gateway::MockBackend::from_records(records, 3);
    const auto h = backend->hidden_states("three token text");
    CHECK(h.layer_count == 4);
    CHECK(h.token_count == 3);
    CHECK(h.hidden_size == 8);
    CHECK(h.values.size() == 4 * 3 * 8);

    const auto again = backend->hidden_states("three token text");
    CHECK(h.values == again.values);
}

TEST_CASE("hidden states can be disabled for capability-error testing") {
    std::vector<json> records{json{{"config", {{"hidden_states", false}}}}};
    auto backend = gateway::MockBackend::from_records(records);
    try {
        backend->hidden_states("text");
        FAIL("expected capability error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::capability);
    }
}

// ---------------------------------------------------------------------------
// HTTP backend against an in-process server
// ---------------------------------------------------------------------------

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

gateway::HttpBackendConfig fast_config(const std::string& url) {
    gateway::HttpBackendConfig config;
    config.base_url = url;
    config.model = "test-model";
    config.retry.max_attempts = 3;
    config.retry.base_delay = std::chrono::milliseconds(2);
    config.timeout = std::chrono::seconds(5);
    return config;
}

TEST_CASE("http backend round-trips a chat completion with logprobs") {
    TestServer ts;
    json seen_request;
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                               httplib::Response& res) {
        seen_request = json::parse(req.body);
        const json reply{
            {"choices",
             json::array(
                 {json{{"message", {{"role", "assistant"}, {"content", "Paris."}}},
                       {"logprobs",
                        {{"content",
                          json::array(
                              {json{{"token", "Paris"},
                                    {"logprob", -0.1},
                                    {"top_logprobs",
                                     json::array({json{{"token", "Paris"}, {"logprob", -0.1}},
                                                  json{{"token", "Lyon"},
                                                       {"logprob", -2.5}}})}}})}}}}})},
        };
        res.set_content(reply.dump(), "application/json");
    });
    ts.start();

    gateway::HttpBackend backend(fast_config(ts.url()));
    gateway::GenerationRequest request;
    request.messages = {{"system", "be brief"}, {"user", "capital of France?"}};
    request.temperature = 0.25;
    request.max_tokens = 16;
    request.top_logprobs = 2;
    request.seed = 7;

    const auto result = backend.generate(request);
    CHECK(result.text == "Paris.");
    REQUIRE(result.tokens.size() == 1);
    CHECK(result.tokens[0].top_candidates.size() == 2);

    CHECK(seen_request.at("model") == "test-model");
    CHECK(seen_request.at("messages").size() == 2);
    CHECK(seen_request.at("temperature").get<double>() == doctest::Approx(0.25));
    CHECK(seen_request.at("logprobs").get<bool>());
    CHECK(seen_request.at("top_logprobs").get<int>() == 2);
    CHECK(seen_request.at("seed").get<int>() == 7);
}

TEST_CASE("http backend retries 500s and succeeds within the budget") {
    TestServer ts;
    std::atomic<int> calls{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 500;
            res.set_content("transient", "text/plain");
            return;
        }
        const json reply{{"choices", json::array({json{
                             {"message", {{"role", "assistant"}, {"content", "ok"}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    ts.start();

    gateway::HttpBackend backend(fast_config(ts.url()));
    gateway::GenerationRequest request;
    request.messages = {{"user", "hi"}};
    CHECK(backend.generate(request).text == "ok");
    CHECK(calls == 3);
}

TEST_CASE("http backend does not retry client errors") {
    TestServer ts;
    std::atomic<int> calls{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("{\"error\":\"bad request body\"}", "application/json");
    });
    ts.start();

    gateway::HttpBackend backend(fast_config(ts.url()));
    gateway::GenerationRequest request;
    request.messages = {{"user", "hi"}};
    try {
        backend.generate(request);
        FAIL("expected backend error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::backend);
        CHECK(std::string(e.what()).find("400") != std::string::npos);
        CHECK(std::string(e.what()).find("bad request body") != std::string::npos);
    }
    CHECK(calls == 1);
}

TEST_CASE("unreachable host fails after the configured retry budget") {
    auto config = fast_config("http://127.0.0.1:1");
    config.retry.max_attempts = 2;
    gateway::HttpBackend backend(config);
    gateway::GenerationRequest request;
    request.messages = {{"user", "hi"}};
    try {
        backend.generate(request);
        FAIL("expected backend error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::backend);
        CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
    }
}

TEST_CASE("http completion scoring keeps only continuation tokens") {
    TestServer ts;
    ts.server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        CHECK(body.at("echo").get<bool>());
        CHECK(body.at("max_tokens").get<int>() == 0);
        const json reply{
            {"choices",
             json::array({json{
                 {"logprobs",
                  {{"tokens", json::array({"The", " sky", " is", " blue"})},
                   {"token_logprobs", json::array({nullptr, -0.2, -0.3, -0.7})},
                   {"text_offset", json::array({0, 3, 7, 10})},
                   {"top_logprobs",
                    json::array({nullptr, json{{" sky", -0.2}, {" sea", -1.7}},
                                 json{{" is", -0.3}}, json{{" blue", -0.7}}})}}}}})},
        };
        res.set_content(reply.dump(), "application/json");
    });
    ts.start();

    gateway::HttpBackend backend(fast_config(ts.url()));
    // context "The sky" has length 7: tokens at offsets 7 and 10 remain
    const auto scored = backend.score_tokens("The sky", " is blue");
    REQUIRE(scored.tokens.size() == 2);
    CHECK(scored.tokens[0].probability == doctest::Approx(std::exp(-0.3)));
    CHECK(scored.tokens[1].probability == doctest::Approx(std::exp(-0.7)));
}

TEST_CASE("http backend parses the hidden-state extension endpoint") {
    TestServer ts;
    ts.server.Post("/v1/hidden_states", [&](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        CHECK(body.at("input") == "two tokens");
        json values = json::array();
        for (int l = 0; l < 2; ++l) {
            json layer = json::array();
            for (int t = 0; t < 2; ++t) {
                layer.push_back(json::array({0.5 * l, 0.25 * t, -1.0}));
            }
            values.push_back(layer);
        }
        res.set_content(json{{"layer_count", 2},
                             {"token_count", 2},
                             {"hidden_size", 3},
                             {"values", values}}
                            .dump(),
                        "application/json");
    });
    ts.start();

    auto config = fast_config(ts.url());
    config.hidden_states = true;
    gateway::HttpBackend backend(config);
    const auto h = backend.hidden_states("two tokens");
    CHECK(h.layer_count == 2);
    CHECK(h.token_count == 2);
    CHECK(h.hidden_size == 3);
    CHECK(h.at(1, 0)[0] == doctest::Approx(0.5));
    CHECK(h.at(0, 1)[1] == doctest::Approx(0.25));
}

TEST_CASE("http backend rejects ragged hidden-state replies") {
    TestServer ts;
    ts.server.Post("/v1/hidden_states", [&](const httplib::Request&, httplib::Response& res) {
        // second layer has only one token
        res.set_content(json{{"layer_count", 2},
                             {"token_count", 2},
                             {"hidden_size", 1},
                             {"values",
                              json::array({json::array({json::array({0.1}),
                                                        json::array({0.2})}),
                                           json::array({json::array({0.3})})})}}
                            .dump(),
                        "application/json");
    });
    ts.start();

    auto config = fast_config(ts.url());
    config.hidden_states = true;
    gateway::HttpBackend backend(config);
    try {
        backend.hidden_states("x");
        FAIL("expected backend error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::backend);
    }
}

TEST_CASE("chat-only http backend refuses hidden states with a capability error") {
    auto config = fast_config("http://127.0.0.1:1");
    config.hidden_states = false;
    gateway::HttpBackend backend(config);
    try {
        backend.hidden_states("text");
        FAIL("expected capability error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::capability);
        CHECK(std::string(e.what()).find("hidden") != std::string::npos);
    }
}

} // TEST_SUITE
