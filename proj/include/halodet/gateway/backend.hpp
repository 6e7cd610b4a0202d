#pragma once

#include <memory>
#include <string>
#include <vector>

#include "halodet/gateway/types.hpp"

namespace halodet::gateway {

// Uniform access to generation, forced-decoding token scoring, sampling and
// hidden-state retrieval. Implementations must be safe to call from multiple
// threads; each call is independent.
class Backend {
public:
    virtual ~Backend() = default;

    virtual BackendCaps capabilities() const = 0;

    virtual GenerationResult generate(const GenerationRequest& request) = 0;

    // One TokenScore per continuation token under teacher forcing.
    virtual ScoredContinuation score_tokens(const std::string& context,
                                            const std::string& continuation) = 0;

    virtual HiddenStates hidden_states(const std::string& text) = 0;

    virtual std::size_t count_tokens(const std::string& text) = 0;
};

// Issues n generation calls (sample_index 0..n-1), at most max_in_flight
// concurrently, and returns results in index order. Any failure aborts with a
// backend error listing every failed index; there is no silent truncation.
std::vector<GenerationResult> sample_n(Backend& backend, const GenerationRequest& request,
                                       int n, int max_in_flight = 8);

// Convenience: single completion text for a one-shot user prompt.
std::string complete_text(Backend& backend, const std::string& prompt, int max_tokens = 512,
                          int top_logprobs = 0);

} // namespace halodet::gateway
