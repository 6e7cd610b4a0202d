#pragma once

#include <optional>
#include <vector>

#include "halodet/core/types.hpp"
#include "halodet/gateway/types.hpp"

namespace halodet::gateway {

// Entropy of one token position from its truncated top-N candidate list.
//
// With candidate probabilities p_i = exp(logprob_i) covering mass m = sum p_i,
// the covered part contributes -sum p_i ln p_i. When the vocabulary size V is
// known the unseen tail (1 - m) is assumed uniform over the V - N remaining
// tokens and contributes -(1 - m) ln((1 - m) / (V - N)); otherwise the covered
// part alone is reported and *truncated is set.
double entropy_from_candidates(const std::vector<TokenCandidate>& candidates,
                               std::optional<int> vocab_size, bool* truncated);

// Converts generated tokens to TokenScore records: probability is
// exp(realized logprob), entropy follows the rule above.
ScoredContinuation scores_from_tokens(const std::vector<GeneratedToken>& tokens,
                                      std::optional<int> vocab_size);

} // namespace halodet::gateway
