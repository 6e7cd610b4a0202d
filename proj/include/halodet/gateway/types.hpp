#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "halodet/core/types.hpp"

namespace halodet::gateway {

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant"
    std::string content;
};

struct GenerationRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 256;
    int top_logprobs = 0; // candidate logprobs requested per position
    std::optional<std::int64_t> seed;
    // Index within a sample_n batch; backends may fold it into the seed,
    // the mock uses it to pick scripted sample variants.
    std::optional<int> sample_index;
};

struct TokenCandidate {
    std::string token_text;
    double logprob = 0.0; // <= 0
};

struct GeneratedToken {
    std::string token_text;
    double logprob = 0.0;
    std::vector<TokenCandidate> top_candidates; // sorted descending by logprob
};

struct GenerationResult {
    std::string text;
    std::vector<GeneratedToken> tokens;
};

// Per-layer, per-token activation vectors; all layers share token count and
// width. Layout is [layer][token][dim].
struct HiddenStates {
    std::size_t layer_count = 0;
    std::size_t token_count = 0;
    std::size_t hidden_size = 0;
    std::vector<double> values;

    std::span<const double> at(std::size_t layer, std::size_t token) const {
        return {values.data() + (layer * token_count + token) * hidden_size, hidden_size};
    }
    std::span<double> at(std::size_t layer, std::size_t token) {
        return {values.data() + (layer * token_count + token) * hidden_size, hidden_size};
    }
};

struct BackendCaps {
    std::string id;                 // used in error messages and manifests
    bool logprobs = false;          // top-candidate logprobs on generation
    bool completion_scoring = false; // forced decoding of a fixed continuation
    bool hidden_states = false;
    bool tokenize = false;
    std::optional<int> vocab_size; // enables the full-entropy remainder term
};

// score_tokens result; entropy_truncated is set when candidate coverage was
// incomplete and no vocabulary size was available for the remainder term.
struct ScoredContinuation {
    std::vector<core::TokenScore> tokens;
    bool entropy_truncated = false;
    // True when the backend had to approximate forced decoding by
    // re-generation instead of echo scoring.
    bool approximate = false;
};

} // namespace halodet::gateway
