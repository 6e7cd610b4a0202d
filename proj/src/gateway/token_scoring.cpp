#include "halodet/gateway/token_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace halodet::gateway {

double entropy_from_candidates(const std::vector<TokenCandidate>& candidates,
                               std::optional<int> vocab_size, bool* truncated) {
    if (truncated) *truncated = false;
    if (candidates.empty()) {
        if (truncated) *truncated = true;
        return 0.0;
    }
    double mass = 0.0;
    double entropy = 0.0;
    for (const auto& c : candidates) {
        const double p = std::exp(std::min(c.logprob, 0.0));
        if (p <= 0.0) continue;
        mass += p;
        entropy -= p * std::log(p);
    }
    // Candidate logprobs can overshoot a total of 1 by rounding; renormalize
    // the covered part so the tail mass below is well defined.
    if (mass > 1.0) {
        entropy = entropy / mass + std::log(mass);
        mass = 1.0;
    }
    const double tail = 1.0 - mass;
    if (tail > 1e-12) {
        const int rest = vocab_size ? *vocab_size - static_cast<int>(candidates.size()) : 0;
        if (vocab_size && rest > 0) {
            entropy -= tail * std::log(tail / static_cast<double>(rest));
        } else if (truncated) {
            *truncated = true;
        }
    }
    return std::max(entropy, 0.0);
}

ScoredContinuation scores_from_tokens(const std::vector<GeneratedToken>& tokens,
                                      std::optional<int> vocab_size) {
    ScoredContinuation out;
    out.tokens.reserve(tokens.size());
    for (const auto& tok : tokens) {
        core::TokenScore score;
        score.token_text = tok.token_text;
        const double p = std::exp(std::min(tok.logprob, 0.0));
        score.probability = std::clamp(p, std::numeric_limits<double>::min(), 1.0);
        bool truncated = false;
        score.entropy = entropy_from_candidates(tok.top_candidates, vocab_size, &truncated);
        out.entropy_truncated = out.entropy_truncated || truncated;
        out.tokens.push_back(std::move(score));
    }
    return out;
}

} // namespace halodet::gateway
