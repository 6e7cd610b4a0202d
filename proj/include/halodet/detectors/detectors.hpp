#pragma once

#include <string>
#include <vector>

#include "halodet/core/types.hpp"
#include "halodet/gateway/backend.hpp"

namespace halodet::detectors {

struct DetectorConfig {
    std::string detector_id;
    std::string template_text;        // {claim} placeholder
    std::string support_template;     // sampling consistency only: {response} {claim}
    int n_samples = 20;               // sampling consistency only
    double temperature = 1.0;         // sampling consistency only
    bool normalize_label_probs = true;
    int top_logprobs = 8;
    int max_tokens = 512;             // reasoning detector reply budget
    int max_in_flight = 8;
};

DetectorConfig default_tf_config();
DetectorConfig default_prob_config();
DetectorConfig default_cot_tf_config();
DetectorConfig default_selfcheck_config();
DetectorConfig default_finetuned_config();

// P_factual from the first generated token's True/False candidate logprobs
// (case and leading-space variants merged). Normalized mode returns
// P(True) / (P(True) + P(False)); raw mode returns P(True).
core::DetectorScore prompt_tf(gateway::Backend& backend, const DetectorConfig& config,
                              const core::Claim& claim);

// P_factual parsed as the first number in the model's reply; percentages are
// divided by 100 and results clamp to [0, 1].
core::DetectorScore prompt_prob(gateway::Backend& backend, const DetectorConfig& config,
                                const core::Claim& claim);

// Free-form reasoning first, then the verdict read as the last standalone
// True/False token; the reasoning text lands in the rationale field.
core::DetectorScore prompt_cot_tf(gateway::Backend& backend, const DetectorConfig& config,
                                  const core::Claim& claim);

// Sampling-consistency detection: draws n_samples responses to the source
// prompt at the configured temperature and takes the supporting fraction as
// P_factual. Each (sample, claim) support judgment is a separate yes/no call.
core::DetectorScore selfcheck(gateway::Backend& backend, const DetectorConfig& config,
                              const core::Claim& claim, const std::string& source_prompt);

// prompt_tf mechanics against a backend serving a fine-tuned detector model;
// label-rationale trained models keep the label in the first token, which is
// exactly what the first-token readout needs.
core::DetectorScore finetuned_detect(gateway::Backend& finetuned_backend,
                                     const DetectorConfig& config, const core::Claim& claim);

// Exposed for reuse and tests.
double parse_probability_reply(const std::string& reply); // throws detector error when absent
bool parse_last_verdict(const std::string& reply);        // throws detector error when absent

} // namespace halodet::detectors
