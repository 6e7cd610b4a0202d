#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "halodet/core/types.hpp"
#include "halodet/gateway/backend.hpp"

namespace halodet::ftdata {

struct BuildOptions {
    bool include_rationales = true;
    bool include_aux_qa = true;
    bool include_paraphrase = false;
    bool half_data = false; // seeded, label-stratified halving of the claim set
    std::int64_t seed = 0;
};

// Detection example in label-rationale format: the output starts with the
// exact label token ("True"/"False"), then ". " and the rationale when
// rationales are enabled. The instruction is the same task statement the
// true/false detector prompt uses.
core::FineTuneExample build_detection_example(const core::Claim& claim,
                                              const std::string& rationale,
                                              const BuildOptions& options);

// Model-written single-paragraph explanation of the claim's label, at most
// 150 words (truncated with a marker beyond). An empty reply is retried once.
std::string generate_rationale(gateway::Backend& backend, const core::Claim& claim,
                               const std::optional<std::string>& evidence);

// Auxiliary QA example: a generated question about the claim's key
// information; factual claims answer from the claim text, hallucinated claims
// answer under the rationale's guidance.
core::FineTuneExample build_qa_example(gateway::Backend& backend, const core::Claim& claim,
                                       const std::string& rationale);

// Detection example over a model paraphrase of the claim (the augmentation
// baseline): same label, paraphrased input. A paraphrase equal to the
// original is retried once, then kept with a warning.
core::FineTuneExample build_paraphrase_example(gateway::Backend& backend,
                                               const core::Claim& claim,
                                               const BuildOptions& options);

// Full dataset construction in claim order: per claim a detection example,
// then the QA example (when enabled), then the paraphrase example (when
// enabled). half_data subsamples claims stratified by label first.
std::vector<core::FineTuneExample> build_dataset(gateway::Backend& backend,
                                                 const std::vector<core::Claim>& claims,
                                                 const BuildOptions& options);

// Label-stratified seeded subsample of ceil(half) per label, original order.
std::vector<core::Claim> stratified_half(const std::vector<core::Claim>& claims,
                                         std::int64_t seed);

// Expected build_dataset size for a claim count under the given options.
std::size_t expected_example_count(std::size_t claim_count, const BuildOptions& options);

// Sidecar manifest describing one emitted dataset.
nlohmann::json dataset_manifest(const std::vector<core::FineTuneExample>& examples,
                                const BuildOptions& options, std::size_t claims_in,
                                std::size_t claims_used);

} // namespace halodet::ftdata
