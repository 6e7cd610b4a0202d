#include "halodet/detectors/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "halodet/core/error.hpp"
#include "halodet/prompts.hpp"

namespace halodet::detectors {

namespace {

std::string lower_trimmed(const std::string& token) {
    std::string out;
    for (char c : token) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string first_word_lower(const std::string& reply) {
    std::string word;
    for (char c : reply) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!word.empty()) {
            break;
        }
    }
    return word;
}

std::string render_claim(const DetectorConfig& config, const core::Claim& claim) {
    return prompts::render(config.template_text, {{"claim", claim.text}});
}

// First-token True/False probabilities with case/leading-space variants
// merged; throws when neither label appears among the candidates.
std::pair<double, double> label_probabilities(const gateway::GenerationResult& result,
                                              const std::string& detector_id) {
    if (result.tokens.empty() || result.tokens.front().top_candidates.empty()) {
        throw detector_error(detector_id +
                             ": backend returned no first-token candidate logprobs; "
                             "top_logprobs support is required");
    }
    double p_true = 0.0, p_false = 0.0;
    bool seen_true = false, seen_false = false;
    for (const auto& cand : result.tokens.front().top_candidates) {
        const std::string norm = lower_trimmed(cand.token_text);
        if (norm == "true") {
            p_true += std::exp(cand.logprob);
            seen_true = true;
        } else if (norm == "false") {
            p_false += std::exp(cand.logprob);
            seen_false = true;
        }
    }
    if (!seen_true && !seen_false) {
        std::ostringstream dump;
        for (const auto& cand : result.tokens.front().top_candidates) {
            dump << " '" << cand.token_text << "'=" << cand.logprob;
        }
        throw detector_error(detector_id +
                             ": neither True nor False among first-token candidates:" +
                             dump.str());
    }
    return {p_true, p_false};
}

core::DetectorScore first_token_score(gateway::Backend& backend, const DetectorConfig& config,
                                      const core::Claim& claim) {
    gateway::GenerationRequest request;
    request.messages = {{"user", render_claim(config, claim)}};
    request.temperature = 0.0;
    request.max_tokens = 4;
    request.top_logprobs = config.top_logprobs;
    const auto result = backend.generate(request);

    const auto [p_true, p_false] = label_probabilities(result, config.detector_id);
    core::DetectorScore score;
    score.claim_id = claim.id;
    score.detector_id = config.detector_id;
    if (config.normalize_label_probs) {
        score.p_factual = p_true / (p_true + p_false);
    } else {
        score.p_factual = std::clamp(p_true, 0.0, 1.0);
    }
    return score;
}

} // namespace

DetectorConfig default_tf_config() {
    DetectorConfig config;
    config.detector_id = "prompt_tf";
    config.template_text = std::string(prompts::kPromptTfTemplate);
    return config;
}

DetectorConfig default_prob_config() {
    DetectorConfig config;
    config.detector_id = "prompt_prob";
    config.template_text = std::string(prompts::kPromptProbTemplate);
    return config;
}

DetectorConfig default_cot_tf_config() {
    DetectorConfig config;
    config.detector_id = "prompt_cot_tf";
    config.template_text = std::string(prompts::kPromptCotTfTemplate);
    return config;
}

DetectorConfig default_selfcheck_config() {
    DetectorConfig config;
    config.detector_id = "selfcheck";
    config.template_text = std::string(prompts::kSupportTemplate);
    config.support_template = std::string(prompts::kSupportTemplate);
    config.n_samples = 20;
    config.temperature = 1.0;
    return config;
}

DetectorConfig default_finetuned_config() {
    DetectorConfig config = default_tf_config();
    config.detector_id = "finetuned";
    return config;
}

core::DetectorScore prompt_tf(gateway::Backend& backend, const DetectorConfig& config,
                              const core::Claim& claim) {
    return first_token_score(backend, config, claim);
}

double parse_probability_reply(const std::string& reply) {
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const char c = reply[i];
        const bool digit = std::isdigit(static_cast<unsigned char>(c)) != 0;
        const bool dot_start = c == '.' && i + 1 < reply.size() &&
                               std::isdigit(static_cast<unsigned char>(reply[i + 1]));
        if (!digit && !dot_start) continue;
        char* end = nullptr;
        const double value = std::strtod(reply.c_str() + i, &end);
        if (end == reply.c_str() + i) continue;
        const bool percent = end < reply.c_str() + reply.size() && *end == '%';
        return std::clamp(percent ? value / 100.0 : value, 0.0, 1.0);
    }
    throw detector_error("prompt_prob: no number found in reply: '" + reply.substr(0, 120) + "'");
}

core::DetectorScore prompt_prob(gateway::Backend& backend, const DetectorConfig& config,
                                const core::Claim& claim) {
    const std::string reply =
        gateway::complete_text(backend, render_claim(config, claim), 32);
    core::DetectorScore score;
    score.claim_id = claim.id;
    score.detector_id = config.detector_id;
    score.p_factual = parse_probability_reply(reply);
    return score;
}

bool parse_last_verdict(const std::string& reply) {
    // Last standalone True/False word; the reasoning may mention both, the
    // verdict follows the reasoning by construction of the prompt.
    std::optional<bool> verdict;
    std::string word;
    auto flush = [&]() {
        if (word == "true") verdict = true;
        if (word == "false") verdict = false;
        word.clear();
    };
    for (char c : reply) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            flush();
        }
    }
    flush();
    if (!verdict) {
        throw detector_error("prompt_cot_tf: no True/False verdict in reply: '" +
                             reply.substr(0, 120) + "'");
    }
    return *verdict;
}

core::DetectorScore prompt_cot_tf(gateway::Backend& backend, const DetectorConfig& config,
                                  const core::Claim& claim) {
    const std::string reply =
        gateway::complete_text(backend, render_claim(config, claim), config.max_tokens);
    core::DetectorScore score;
    score.claim_id = claim.id;
    score.detector_id = config.detector_id;
    score.p_factual = parse_last_verdict(reply) ? 1.0 : 0.0;
    score.rationale = reply;
    return score;
}

core::DetectorScore selfcheck(gateway::Backend& backend, const DetectorConfig& config,
                              const core::Claim& claim, const std::string& source_prompt) {
    if (config.n_samples < 1) {
        throw invalid_input("selfcheck: n_samples must be >= 1");
    }
    gateway::GenerationRequest request;
    request.messages = {{"user", source_prompt}};
    request.temperature = config.temperature;
    request.max_tokens = 1024;
    const auto samples = gateway::sample_n(backend, request, config.n_samples,
                                           config.max_in_flight);

    const std::string support_template = config.support_template.empty()
                                             ? std::string(prompts::kSupportTemplate)
                                             : config.support_template;
    int supports = 0;
    for (const auto& sample : samples) {
        const std::string judgment_prompt = prompts::render(
            support_template, {{"response", sample.text}, {"claim", claim.text}});
        const std::string reply = gateway::complete_text(backend, judgment_prompt, 8);
        const std::string word = first_word_lower(reply);
        if (word == "yes") {
            ++supports;
        } else if (word != "no") {
            std::cerr << "halodet: ambiguous support judgment for claim " << claim.id << " ('"
                      << reply.substr(0, 80) << "'); counting as not supporting\n";
        }
    }
    core::DetectorScore score;
    score.claim_id = claim.id;
    score.detector_id = config.detector_id;
    score.p_factual = static_cast<double>(supports) / static_cast<double>(config.n_samples);
    return score;
}

core::DetectorScore finetuned_detect(gateway::Backend& finetuned_backend,
                                     const DetectorConfig& config, const core::Claim& claim) {
    return first_token_score(finetuned_backend, config, claim);
}

} // namespace halodet::detectors
