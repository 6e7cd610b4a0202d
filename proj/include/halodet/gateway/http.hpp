#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "halodet/gateway/backend.hpp"

namespace halodet::gateway {

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{250};
    double factor = 2.0;
};

struct HttpBackendConfig {
    std::string base_url;        // e.g. "http://localhost:8000"
    std::string model;           // model name passed through on every call
    std::string api_key_env = "HALODET_API_KEY"; // name of the env var, never the key itself
    std::chrono::seconds timeout{60};
    int max_in_flight = 8;
    RetryPolicy retry;
    // Capability switches for servers that only speak the chat endpoint.
    bool completion_scoring = true;
    bool hidden_states = false;
    std::optional<int> vocab_size;
    std::string id = "http";
};

// Chat-completions-compatible HTTP client.
//
// Endpoints:
//   POST /v1/chat/completions  - generation with per-token top logprobs
//   POST /v1/completions       - echo scoring for forced decoding
//   POST /v1/hidden_states     - optional extension (docs/hidden_states_api.md)
//
// Transport failures and retryable statuses (429, 5xx) are retried with
// exponential backoff up to the configured attempt budget; responses that
// were received but are malformed are never blindly retried. At most
// max_in_flight requests are outstanding at any time across all threads.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    BackendCaps capabilities() const override;
    GenerationResult generate(const GenerationRequest& request) override;
    ScoredContinuation score_tokens(const std::string& context,
                                    const std::string& continuation) override;
    HiddenStates hidden_states(const std::string& text) override;
    std::size_t count_tokens(const std::string& text) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace halodet::gateway
