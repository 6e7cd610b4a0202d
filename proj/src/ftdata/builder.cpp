#include "halodet/ftdata/builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <sstream>

#include "halodet/core/error.hpp"
#include "halodet/core/hash.hpp"
#include "halodet/core/jsonl.hpp"
#include "halodet/core/rng.hpp"
#include "halodet/prompts.hpp"

namespace halodet::ftdata {

namespace {

constexpr std::size_t kMaxRationaleWords = 150;
constexpr const char* kTruncationMarker = " [truncated]";

void require_labeled(const core::Claim& claim, const char* op) {
    if (claim.label == core::Label::unlabeled) {
        throw invalid_input(std::string(op) + ": claim '" + claim.id + "' is unlabeled");
    }
}

std::string single_paragraph(const std::string& text) {
    std::string out;
    bool in_space = true;
    for (char c : text) {
        if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(c);
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string truncate_words(const std::string& text, std::size_t max_words) {
    std::istringstream in(text);
    std::string word;
    std::string out;
    std::size_t count = 0;
    while (in >> word) {
        if (count == max_words) {
            out += kTruncationMarker;
            return out;
        }
        if (count > 0) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

std::string normalized_lower(const std::string& text) {
    std::string out;
    bool in_space = true;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace

core::FineTuneExample build_detection_example(const core::Claim& claim,
                                              const std::string& rationale,
                                              const BuildOptions& options) {
    require_labeled(claim, "build_detection_example");
    core::FineTuneExample example;
    example.instruction = std::string(prompts::kDetectInstruction);
    example.input = claim.text;
    example.task = core::TaskKind::detect;
    example.source_claim_id = claim.id;

    const bool factual = claim.label == core::Label::factual;
    example.output = factual ? "True" : "False";
    if (options.include_rationales && !rationale.empty()) {
        example.output += ". " + rationale;
    }

    // The first output token carries the label probability at inference time;
    // enforce the format instead of assuming it.
    if (example.output.rfind(factual ? "True" : "False", 0) != 0) {
        throw Error(ErrorKind::internal, "detection example output lost its label prefix");
    }
    return example;
}

std::string generate_rationale(gateway::Backend& backend, const core::Claim& claim,
                               const std::optional<std::string>& evidence) {
    const std::string verdict =
        claim.label == core::Label::hallucinated ? "inaccurate" : "accurate";
    const std::string evidence_block =
        evidence ? "Evidence: " + *evidence + "\n" : std::string{};
    const std::string prompt =
        prompts::render(prompts::kRationaleTemplate, {{"claim", claim.text},
                                                      {"evidence_block", evidence_block},
                                                      {"verdict", verdict}});
    std::string reply;
    for (int attempt = 0; attempt < 2; ++attempt) {
        reply = single_paragraph(gateway::complete_text(backend, prompt, 512));
        if (!reply.empty()) break;
    }
    if (reply.empty()) {
        throw detector_error("generate_rationale: empty model reply twice for claim '" +
                             claim.id + "'");
    }
    return truncate_words(reply, kMaxRationaleWords);
}

core::FineTuneExample build_qa_example(gateway::Backend& backend, const core::Claim& claim,
                                       const std::string& rationale) {
    require_labeled(claim, "build_qa_example");
    const bool hallucinated = claim.label == core::Label::hallucinated;
    if (hallucinated && rationale.empty()) {
        throw invalid_input("build_qa_example: hallucinated claim '" + claim.id +
                            "' needs a rationale to guide the corrected answer");
    }

    const std::string question = single_paragraph(gateway::complete_text(
        backend, prompts::render(prompts::kQuestionTemplate, {{"claim", claim.text}}), 128));
    if (question.empty()) {
        throw detector_error("build_qa_example: model produced no question for claim '" +
                             claim.id + "'");
    }

    std::string answer_prompt;
    if (hallucinated) {
        answer_prompt = prompts::render(
            prompts::kCorrectedAnswerTemplate,
            {{"claim", claim.text}, {"rationale", rationale}, {"question", question}});
    } else {
        answer_prompt = prompts::render(prompts::kFactualAnswerTemplate,
                                        {{"claim", claim.text}, {"question", question}});
    }
    const std::string answer =
        single_paragraph(gateway::complete_text(backend, answer_prompt, 256));
    if (answer.empty()) {
        throw detector_error("build_qa_example: model produced no answer for claim '" +
                             claim.id + "'");
    }

    core::FineTuneExample example;
    example.instruction = std::string(prompts::kQaInstruction);
    example.input = question;
    example.output = answer;
    example.task = core::TaskKind::qa;
    example.source_claim_id = claim.id;
    return example;
}

core::FineTuneExample build_paraphrase_example(gateway::Backend& backend,
                                               const core::Claim& claim,
                                               const BuildOptions& options) {
    require_labeled(claim, "build_paraphrase_example");
    std::string paraphrase;
    for (int attempt = 0; attempt < 2; ++attempt) {
        paraphrase = single_paragraph(gateway::complete_text(
            backend, prompts::render(prompts::kParaphraseTemplate, {{"claim", claim.text}}),
            256));
        if (!paraphrase.empty() && normalized_lower(paraphrase) != normalized_lower(claim.text)) {
            break;
        }
    }
    if (paraphrase.empty() || normalized_lower(paraphrase) == normalized_lower(claim.text)) {
        std::cerr << "halodet: paraphrase for claim " << claim.id
                  << " equals the original after two attempts; keeping it\n";
        if (paraphrase.empty()) paraphrase = claim.text;
    }

    core::Claim paraphrased = claim;
    paraphrased.text = paraphrase;
    BuildOptions detection_options = options;
    detection_options.include_rationales = false; // augmentation baseline keeps bare labels
    return build_detection_example(paraphrased, {}, detection_options);
}

std::vector<core::Claim> stratified_half(const std::vector<core::Claim>& claims,
                                         std::int64_t seed) {
    core::Rng rng(static_cast<std::uint64_t>(seed) ^ 0x8f1d3a2bc45e6907ULL);
    std::vector<bool> selected(claims.size(), false);
    for (core::Label label :
         {core::Label::factual, core::Label::hallucinated, core::Label::unlabeled}) {
        std::vector<std::size_t> bucket;
        for (std::size_t i = 0; i < claims.size(); ++i) {
            if (claims[i].label == label) bucket.push_back(i);
        }
        if (bucket.empty()) continue;
        rng.shuffle(bucket);
        const std::size_t take = (bucket.size() + 1) / 2;
        for (std::size_t i = 0; i < take; ++i) selected[bucket[i]] = true;
    }
    std::vector<core::Claim> out;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        if (selected[i]) out.push_back(claims[i]);
    }
    return out;
}

std::size_t expected_example_count(std::size_t claim_count, const BuildOptions& options) {
    std::size_t per_claim = 1;
    if (options.include_aux_qa) ++per_claim;
    if (options.include_paraphrase) ++per_claim;
    return claim_count * per_claim;
}

std::vector<core::FineTuneExample> build_dataset(gateway::Backend& backend,
                                                 const std::vector<core::Claim>& claims,
                                                 const BuildOptions& options) {
    for (const auto& claim : claims) {
        require_labeled(claim, "build_dataset");
    }
    const std::vector<core::Claim> used =
        options.half_data ? stratified_half(claims, options.seed) : claims;

    std::vector<core::FineTuneExample> examples;
    examples.reserve(expected_example_count(used.size(), options));
    for (const auto& claim : used) {
        // The QA path for hallucinated claims is rationale-guided, so a
        // rationale is produced even when the detection output omits it.
        std::string rationale;
        const bool needs_rationale =
            options.include_rationales ||
            (options.include_aux_qa && claim.label == core::Label::hallucinated);
        if (needs_rationale) {
            rationale = generate_rationale(backend, claim, std::nullopt);
        }
        examples.push_back(build_detection_example(claim, rationale, options));
        if (options.include_aux_qa) {
            examples.push_back(build_qa_example(backend, claim, rationale));
        }
        if (options.include_paraphrase) {
            examples.push_back(build_paraphrase_example(backend, claim, options));
        }
    }
    return examples;
}

nlohmann::json dataset_manifest(const std::vector<core::FineTuneExample>& examples,
                                const BuildOptions& options, std::size_t claims_in,
                                std::size_t claims_used) {
    std::size_t n_detect = 0, n_qa = 0;
    std::string serialized;
    for (const auto& e : examples) {
        (e.task == core::TaskKind::detect ? n_detect : n_qa) += 1;
        serialized += nlohmann::json(e).dump();
        serialized += '\n';
    }
    return nlohmann::json{
        {"options",
         {{"include_rationales", options.include_rationales},
          {"include_aux_qa", options.include_aux_qa},
          {"include_paraphrase", options.include_paraphrase},
          {"half_data", options.half_data},
          {"seed", options.seed}}},
        {"counts",
         {{"claims_in", claims_in},
          {"claims_used", claims_used},
          {"examples", examples.size()},
          {"detect", n_detect},
          {"qa", n_qa}}},
        {"content_hash", core::hex64(core::fnv1a64(serialized))},
        {"shuffled", false}, // detection and QA streams are merged unshuffled
    };
}

} // namespace halodet::ftdata
