#include "halodet/gateway/http.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "halodet/core/error.hpp"
#include "halodet/gateway/token_scoring.hpp"

namespace halodet::gateway {

namespace {

using nlohmann::json;

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

// Bounded in-flight contract shared by every call on the backend.
class Gate {
public:
    explicit Gate(int limit) : limit_(limit) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

struct GateGuard {
    explicit GateGuard(Gate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateGuard() { gate_.release(); }
    Gate& gate_;
};

} // namespace

struct HttpBackend::Impl {
    HttpBackendConfig config;
    Gate gate;
    std::string api_key;
    bool log_success = false;

    explicit Impl(HttpBackendConfig cfg)
        : config(std::move(cfg)), gate(std::max(config.max_in_flight, 1)) {
        if (const char* key = std::getenv(config.api_key_env.c_str())) {
            api_key = key;
        }
        log_success = std::getenv("HALODET_HTTP_LOG") != nullptr;
    }

    json post_json(const std::string& path, const json& body) {
        GateGuard guard(gate);
        const std::string payload = body.dump();
        std::string last_error;
        auto delay = config.retry.base_delay;

        for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
            httplib::Client client(config.base_url);
            client.set_connection_timeout(static_cast<time_t>(config.timeout.count()), 0);
            client.set_read_timeout(static_cast<time_t>(config.timeout.count()), 0);
            client.set_write_timeout(static_cast<time_t>(config.timeout.count()), 0);
            httplib::Headers headers;
            if (!api_key.empty()) {
                headers.emplace("Authorization", "Bearer " + api_key);
            }

            const auto start = std::chrono::steady_clock::now();
            auto res = client.Post(path, headers, payload, "application/json");
            const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start);

            if (res && res->status >= 200 && res->status < 300) {
                if (log_success) {
                    std::cerr << "halodet: POST " << path << " attempt " << attempt << " ok in "
                              << latency.count() << " ms\n";
                }
                try {
                    return json::parse(res->body);
                } catch (const json::parse_error& e) {
                    // A received-but-malformed response is not retried.
                    throw backend_error("POST " + path + ": unparseable response body: " +
                                        std::string(e.what()));
                }
            }

            if (res && !retryable_status(res->status)) {
                throw backend_error("POST " + path + ": HTTP " + std::to_string(res->status) +
                                    ": " + body_excerpt(res->body));
            }

            last_error = res ? "HTTP " + std::to_string(res->status)
                             : "transport error (" + httplib::to_string(res.error()) + ")";
            std::cerr << "halodet: POST " << path << " attempt " << attempt << "/"
                      << config.retry.max_attempts << " failed (" << last_error << ") after "
                      << latency.count() << " ms";
            if (attempt < config.retry.max_attempts) {
                std::cerr << "; retrying in " << delay.count() << " ms";
                std::cerr << "\n";
                std::this_thread::sleep_for(delay);
                delay = std::chrono::milliseconds(
                    static_cast<long>(std::llround(static_cast<double>(delay.count()) *
                                                   config.retry.factor)));
            } else {
                std::cerr << "\n";
            }
        }
        throw backend_error("POST " + path + ": failed after " +
                            std::to_string(config.retry.max_attempts) + " attempts: " +
                            last_error);
    }
};

HttpBackend::HttpBackend(HttpBackendConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    if (impl_->config.base_url.empty()) {
        throw invalid_input("http backend requires a base_url");
    }
}

HttpBackend::~HttpBackend() = default;

BackendCaps HttpBackend::capabilities() const {
    BackendCaps caps;
    caps.id = impl_->config.id;
    caps.logprobs = true;
    caps.completion_scoring = impl_->config.completion_scoring;
    caps.hidden_states = impl_->config.hidden_states;
    caps.tokenize = false;
    caps.vocab_size = impl_->config.vocab_size;
    return caps;
}

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
    json body{
        {"model", impl_->config.model},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    auto& messages = body["messages"] = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    if (request.top_logprobs > 0) {
        body["logprobs"] = true;
        body["top_logprobs"] = request.top_logprobs;
    }
    if (request.seed) {
        // Distinct sample indices need distinct seeds or servers dedupe them.
        body["seed"] = *request.seed + (request.sample_index ? *request.sample_index : 0);
    }

    const json reply = impl_->post_json("/v1/chat/completions", body);
    if (!reply.contains("choices") || reply.at("choices").empty()) {
        throw backend_error("chat completion reply carries no choices");
    }
    const json& choice = reply.at("choices").at(0);

    GenerationResult result;
    result.text = choice.at("message").at("content").get<std::string>();
    if (choice.contains("logprobs") && !choice.at("logprobs").is_null() &&
        choice.at("logprobs").contains("content")) {
        for (const auto& entry : choice.at("logprobs").at("content")) {
            GeneratedToken tok;
            tok.token_text = entry.at("token").get<std::string>();
            tok.logprob = entry.at("logprob").get<double>();
            if (entry.contains("top_logprobs")) {
                for (const auto& cand : entry.at("top_logprobs")) {
                    tok.top_candidates.push_back({cand.at("token").get<std::string>(),
                                                  cand.at("logprob").get<double>()});
                }
            }
            result.tokens.push_back(std::move(tok));
        }
    }
    return result;
}

ScoredContinuation HttpBackend::score_tokens(const std::string& context,
                                             const std::string& continuation) {
    if (continuation.empty()) {
        throw invalid_input("score_tokens: continuation must be non-empty");
    }

    if (!impl_->config.completion_scoring) {
        // Chat-only server: approximate forced decoding by regenerating from
        // the context and scoring whatever greedy decoding produces.
        GenerationRequest req;
        req.messages = {{"user", context.empty() ? continuation : context}};
        req.temperature = 0.0;
        req.max_tokens = static_cast<int>(continuation.size() / 2 + 16);
        req.top_logprobs = 4;
        auto generated = generate(req);
        auto scored = scores_from_tokens(generated.tokens, impl_->config.vocab_size);
        scored.approximate = true;
        return scored;
    }

    json body{
        {"model", impl_->config.model},
        {"prompt", context + continuation},
        {"max_tokens", 0},
        {"echo", true},
        {"logprobs", 4},
    };
    const json reply = impl_->post_json("/v1/completions", body);
    if (!reply.contains("choices") || reply.at("choices").empty()) {
        throw backend_error("completion-scoring reply carries no choices");
    }
    const json& lp = reply.at("choices").at(0).at("logprobs");
    const auto& tokens = lp.at("tokens");
    const auto& token_logprobs = lp.at("token_logprobs");
    const auto& offsets = lp.at("text_offset");

    std::vector<GeneratedToken> scored;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto offset = offsets.at(i).get<std::size_t>();
        if (offset < context.size()) continue; // context token, not part of the continuation
        GeneratedToken tok;
        tok.token_text = tokens.at(i).get<std::string>();
        tok.logprob = token_logprobs.at(i).is_null() ? 0.0 : token_logprobs.at(i).get<double>();
        if (lp.contains("top_logprobs") && i < lp.at("top_logprobs").size() &&
            !lp.at("top_logprobs").at(i).is_null()) {
            for (const auto& [cand_text, cand_lp] : lp.at("top_logprobs").at(i).items()) {
                tok.top_candidates.push_back({cand_text, cand_lp.get<double>()});
            }
            std::sort(tok.top_candidates.begin(), tok.top_candidates.end(),
                      [](const TokenCandidate& a, const TokenCandidate& b) {
                          if (a.logprob != b.logprob) return a.logprob > b.logprob;
                          return a.token_text < b.token_text;
                      });
        }
        scored.push_back(std::move(tok));
    }
    if (scored.empty()) {
        throw backend_error("completion scoring returned no continuation tokens");
    }
    return scores_from_tokens(scored, impl_->config.vocab_size);
}

HiddenStates HttpBackend::hidden_states(const std::string& text) {
    if (!impl_->config.hidden_states) {
        throw capability_error("backend '" + impl_->config.id +
                               "' does not expose hidden states; use the mock backend or a "
                               "server implementing the /v1/hidden_states extension");
    }
    json body{{"model", impl_->config.model}, {"input", text}};
    const json reply = impl_->post_json("/v1/hidden_states", body);

    HiddenStates h;
    h.layer_count = reply.at("layer_count").get<std::size_t>();
    h.token_count = reply.at("token_count").get<std::size_t>();
    h.hidden_size = reply.at("hidden_size").get<std::size_t>();
    const auto& values = reply.at("values");
    if (values.size() != h.layer_count) {
        throw backend_error("hidden_states reply: layer count mismatch");
    }
    h.values.reserve(h.layer_count * h.token_count * h.hidden_size);
    for (const auto& layer : values) {
        if (layer.size() != h.token_count) {
            throw backend_error("hidden_states reply: token count mismatch across layers");
        }
        for (const auto& token : layer) {
            if (token.size() != h.hidden_size) {
                throw backend_error("hidden_states reply: vector width mismatch");
            }
            for (const auto& v : token) {
                h.values.push_back(v.get<double>());
            }
        }
    }
    return h;
}

std::size_t HttpBackend::count_tokens(const std::string& text) {
    (void)text;
    throw capability_error("backend '" + impl_->config.id +
                           "' has no tokenize endpoint; callers fall back to whitespace counts");
}

} // namespace halodet::gateway
