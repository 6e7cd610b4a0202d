#include "halodet/gateway/mock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "halodet/core/error.hpp"
#include "halodet/core/hash.hpp"
#include "halodet/core/jsonl.hpp"
#include "halodet/core/rng.hpp"
#include "halodet/gateway/token_scoring.hpp"

namespace halodet::gateway {

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    if (out.empty()) out.push_back("");
    return out;
}

std::string render_messages(const GenerationRequest& request) {
    std::string text;
    for (const auto& m : request.messages) {
        if (!text.empty()) text += '\n';
        text += m.content;
    }
    return text;
}

} // namespace

std::unique_ptr<MockBackend> MockBackend::from_file(const std::string& script_path,
                                                    std::uint64_t seed) {
    std::vector<nlohmann::json> records;
    for (auto& rec : core::read_jsonl_raw(script_path)) {
        records.push_back(std::move(rec.value));
    }
    return std::unique_ptr<MockBackend>(new MockBackend(std::move(records), seed));
}

std::unique_ptr<MockBackend> MockBackend::from_records(std::vector<nlohmann::json> records,
                                                       std::uint64_t seed) {
    return std::unique_ptr<MockBackend>(new MockBackend(std::move(records), seed));
}

MockBackend::MockBackend(std::vector<nlohmann::json> records, std::uint64_t seed) : seed_(seed) {
    for (const auto& j : records) {
        if (j.contains("config")) {
            const auto& cfg = j.at("config");
            hidden_layers_ = cfg.value("hidden_layers", hidden_layers_);
            hidden_width_ = cfg.value("hidden_width", hidden_width_);
            hidden_enabled_ = cfg.value("hidden_states", hidden_enabled_);
            completion_scoring_ = cfg.value("completion_scoring", completion_scoring_);
            if (cfg.contains("vocab_size") && !cfg.at("vocab_size").is_null()) {
                vocab_size_ = cfg.at("vocab_size").get<int>();
            }
            continue;
        }
        Record r;
        r.match = j.value("match", std::string{});
        if (j.contains("match_all")) {
            r.match_all = j.at("match_all").get<std::vector<std::string>>();
        }
        r.response = j.value("response", std::string{});
        if (j.contains("tokens")) {
            for (const auto& t : j.at("tokens")) {
                GeneratedToken tok;
                tok.token_text = t.at("text").get<std::string>();
                tok.logprob = t.at("logprob").get<double>();
                if (t.contains("top")) {
                    for (const auto& cand : t.at("top")) {
                        tok.top_candidates.push_back(
                            {cand.at(0).get<std::string>(), cand.at(1).get<double>()});
                    }
                }
                r.tokens.push_back(std::move(tok));
            }
        }
        if (j.contains("samples")) {
            r.samples = j.at("samples").get<std::vector<std::string>>();
        }
        if (j.contains("fail")) {
            r.fail_message = j.at("fail").get<std::string>();
        }
        if (j.contains("fail_indices")) {
            r.fail_indices = j.at("fail_indices").get<std::vector<int>>();
            if (r.fail_message.empty()) r.fail_message = "scripted failure";
        } else if (j.contains("fail")) {
            r.fail_all = true;
        }
        records_.push_back(std::move(r));
    }
}

const MockBackend::Record* MockBackend::find_match(const std::string& text) const {
    for (const auto& r : records_) {
        if (r.match.empty() && r.match_all.empty()) continue;
        if (!r.match.empty() && text.find(r.match) == std::string::npos) continue;
        bool all = true;
        for (const auto& needle : r.match_all) {
            if (text.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) return &r;
    }
    return nullptr;
}

BackendCaps MockBackend::capabilities() const {
    BackendCaps caps;
    caps.id = "mock";
    caps.logprobs = true;
    caps.completion_scoring = completion_scoring_;
    caps.hidden_states = hidden_enabled_;
    caps.tokenize = true;
    caps.vocab_size = vocab_size_;
    return caps;
}

std::vector<GeneratedToken> MockBackend::synthesize_tokens(const std::string& text,
                                                           int top_logprobs) const {
    std::vector<GeneratedToken> out;
    std::size_t position = 0;
    for (const auto& word : whitespace_tokens(text)) {
        const std::uint64_t h =
            core::fnv1a64(word, core::fnv1a64(std::to_string(position), seed_ ^ 0x51ed2701u));
        // Probability in [0.25, 0.99), biased high so synthesized text does
        // not look uniformly uncertain.
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        const double p = 0.25 + 0.74 * u;
        GeneratedToken tok;
        tok.token_text = word;
        tok.logprob = std::log(p);
        if (top_logprobs > 0) {
            tok.top_candidates.push_back({word, tok.logprob});
            double remaining = 1.0 - std::exp(tok.logprob);
            for (int alt = 1; alt < top_logprobs && remaining > 1e-6; ++alt) {
                const double share = remaining * 0.5;
                tok.top_candidates.push_back(
                    {word + "#" + std::to_string(alt), std::log(share)});
                remaining -= share;
            }
            std::sort(tok.top_candidates.begin(), tok.top_candidates.end(),
                      [](const TokenCandidate& a, const TokenCandidate& b) {
                          if (a.logprob != b.logprob) return a.logprob > b.logprob;
                          return a.token_text < b.token_text; // total order for ties
                      });
        }
        out.push_back(std::move(tok));
        ++position;
    }
    return out;
}

GenerationResult MockBackend::generate(const GenerationRequest& request) {
    const std::string rendered = render_messages(request);
    const Record* rec = find_match(rendered);

    std::string text;
    if (rec) {
        if (rec->fail_all) {
            throw backend_error("mock: " + rec->fail_message);
        }
        if (request.sample_index &&
            std::find(rec->fail_indices.begin(), rec->fail_indices.end(),
                      *request.sample_index) != rec->fail_indices.end()) {
            throw backend_error("mock: " + rec->fail_message);
        }
        if (request.temperature > 0.0 && !rec->samples.empty()) {
            const std::size_t idx =
                request.sample_index ? static_cast<std::size_t>(*request.sample_index) : 0;
            text = rec->samples[idx % rec->samples.size()];
        } else {
            text = rec->response;
        }
    } else {
        // Seeded fallback: deterministic pseudo-response derived from the
        // rendered request (and sample index at temperature > 0).
        std::uint64_t h = core::fnv1a64(rendered, seed_ ^ 0x9e3779b9u);
        if (request.temperature > 0.0 && request.sample_index) {
            h = core::fnv1a64(std::to_string(*request.sample_index), h);
        }
        text = "mock reply " + core::hex64(h);
    }

    GenerationResult result;
    result.text = text;
    if (rec && !rec->tokens.empty() && (request.temperature == 0.0 || rec->samples.empty())) {
        result.tokens = rec->tokens;
        if (request.top_logprobs == 0) {
            for (auto& t : result.tokens) t.top_candidates.clear();
        } else {
            for (auto& t : result.tokens) {
                if (t.top_candidates.size() > static_cast<std::size_t>(request.top_logprobs)) {
                    t.top_candidates.resize(static_cast<std::size_t>(request.top_logprobs));
                }
            }
        }
    } else {
        result.tokens = synthesize_tokens(text, request.top_logprobs);
    }
    return result;
}

ScoredContinuation MockBackend::score_tokens(const std::string& context,
                                             const std::string& continuation) {
    if (continuation.empty()) {
        throw invalid_input("score_tokens: continuation must be non-empty");
    }
    if (!completion_scoring_) {
        throw capability_error("backend 'mock' was configured without completion scoring");
    }
    (void)context;
    const Record* rec = find_match(continuation);
    std::vector<GeneratedToken> tokens;
    if (rec && !rec->tokens.empty()) {
        tokens = rec->tokens;
    } else {
        tokens = synthesize_tokens(continuation, 4);
    }
    return scores_from_tokens(tokens, vocab_size_);
}

HiddenStates MockBackend::hidden_states(const std::string& text) {
    if (!hidden_enabled_) {
        throw capability_error(
            "backend 'mock' was configured without hidden states; use a "
            "hidden-state-capable server or enable them in the mock script");
    }
    const auto words = whitespace_tokens(text);
    HiddenStates h;
    h.layer_count = hidden_layers_;
    h.token_count = words.size();
    h.hidden_size = hidden_width_;
    h.values.resize(h.layer_count * h.token_count * h.hidden_size);

    // Dimension 0 carries a strong text-parity signal so probes trained on
    // mock data have something to find; the rest is seeded hash noise.
    const std::uint64_t text_hash = core::fnv1a64(text, seed_);
    const double parity = (text_hash & 1) ? 0.8 : -0.8;
    for (std::size_t l = 0; l < h.layer_count; ++l) {
        for (std::size_t t = 0; t < h.token_count; ++t) {
            auto row = h.at(l, t);
            for (std::size_t d = 0; d < h.hidden_size; ++d) {
                core::Rng rng(text_hash ^ (l * 1000003ULL + t * 10007ULL + d * 101ULL + 7ULL));
                row[d] = rng.uniform_real(-1.0, 1.0);
            }
            row[0] = parity + 0.1 * row[0];
        }
    }
    return h;
}

std::size_t MockBackend::count_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::size_t n = 0;
    while (in >> tok) ++n;
    return n;
}

} // namespace halodet::gateway
