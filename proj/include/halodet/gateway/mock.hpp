#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "halodet/gateway/backend.hpp"

namespace halodet::gateway {

// Offline backend driven by a script of matcher records plus a seeded
// fallback generator; a pure function of (request, script, seed), so outputs
// are byte-identical across runs and platforms.
//
// Script format, one JSON record per line:
//   {"config": {"hidden_layers": 4, "hidden_width": 16, "vocab_size": 32000,
//               "hidden_states": true, "completion_scoring": true}}
//   {"match": "capital of France", "match_all": ["Question:", "France"],
//    "response": "Paris is the capital of France.",
//    "tokens": [{"text": "Paris", "logprob": -0.1,
//                "top": [["Paris", -0.1], ["Lyon", -2.8]]}],
//    "samples": ["variant one", "variant two"],
//    "fail": "scripted outage", "fail_indices": [7]}
//
// generate() matches records (file order, first hit wins) against the
// concatenated message contents; score_tokens() matches against the
// continuation. A record matches when "match" (if present) and every entry of
// "match_all" (if present) occur as substrings. "samples" serves sample_index
// lookups at temperature > 0.
class MockBackend : public Backend {
public:
    static std::unique_ptr<MockBackend> from_file(const std::string& script_path,
                                                  std::uint64_t seed = 0);
    static std::unique_ptr<MockBackend> from_records(std::vector<nlohmann::json> records,
                                                     std::uint64_t seed = 0);

    BackendCaps capabilities() const override;
    GenerationResult generate(const GenerationRequest& request) override;
    ScoredContinuation score_tokens(const std::string& context,
                                    const std::string& continuation) override;
    HiddenStates hidden_states(const std::string& text) override;
    std::size_t count_tokens(const std::string& text) override;

private:
    struct Record {
        std::string match;
        std::vector<std::string> match_all;
        std::string response;
        std::vector<GeneratedToken> tokens;
        std::vector<std::string> samples;
        std::string fail_message;
        bool fail_all = false;
        std::vector<int> fail_indices;
    };

    MockBackend(std::vector<nlohmann::json> records, std::uint64_t seed);

    const Record* find_match(const std::string& text) const;
    std::vector<GeneratedToken> synthesize_tokens(const std::string& text,
                                                  int top_logprobs) const;

    std::vector<Record> records_;
    std::uint64_t seed_ = 0;
    std::size_t hidden_layers_ = 4;
    std::size_t hidden_width_ = 16;
    std::optional<int> vocab_size_;
    bool hidden_enabled_ = true;
    bool completion_scoring_ = true;
};

} // namespace halodet::gateway
