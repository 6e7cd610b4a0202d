#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "halodet/core/types.hpp"
#include "halodet/gateway/backend.hpp"

namespace halodet::pipeline {

// One input row: a prompt and the long-form response to mine for claims.
struct PromptRecord {
    std::string prompt_id;
    std::string prompt;
    std::string response;
};

void to_json(nlohmann::json& j, const PromptRecord& r);
void from_json(const nlohmann::json& j, PromptRecord& r);

std::vector<PromptRecord> read_prompt_records(const std::string& path);
void write_prompt_records(const std::string& path, const std::vector<PromptRecord>& records);

struct PipelineConfig {
    std::string decompose_template;   // {prompt} {response}
    std::string relevance_template;   // {prompt} {claim}
    std::string extraction_template;  // {response} {claim}
    std::string labeler = "file";     // "file" | "search" | "none"
    std::string label_file;
};

PipelineConfig default_pipeline_config();

// Parses a line-per-claim model reply into claims; ids derive from the hash
// of prompt_id plus the claim index, so a rerun reproduces them.
std::vector<core::Claim> decompose(gateway::Backend& backend, const PipelineConfig& config,
                                   const std::string& prompt_id, const std::string& prompt,
                                   const std::string& response);

// Keeps claims the model judges relevant to the prompt; ambiguous replies
// keep the claim and log a warning.
std::vector<core::Claim> filter_relevant(gateway::Backend& backend, const PipelineConfig& config,
                                         const std::string& prompt,
                                         std::vector<core::Claim> claims);

enum class SpanStatus { exact, overlap, none };

// Anchors the claim to the response: the model proposes a passage, verified
// by exact substring match; on mismatch the longest common contiguous overlap
// of at least 10 characters is used, else the span stays empty.
core::Claim extract_original_span(gateway::Backend& backend, const PipelineConfig& config,
                                  const std::string& response, core::Claim claim,
                                  SpanStatus* status = nullptr);

class Labeler {
public:
    virtual ~Labeler() = default;
    virtual std::vector<core::Claim> label_claims(std::vector<core::Claim> claims) = 0;
};

// Joins against a pre-labeled JSON Lines file of (claim_text, label) records
// by exact claim text after whitespace normalization; unmatched claims stay
// unlabeled.
class FileLabeler : public Labeler {
public:
    explicit FileLabeler(const std::string& label_file);
    std::vector<core::Claim> label_claims(std::vector<core::Claim> claims) override;

private:
    std::unordered_map<std::string, core::Label> entries_;
};

// Placeholder for search-backed labeling (multi-step query generation plus
// support reasoning); constructing one succeeds, labeling reports that no
// search implementation ships with the toolkit.
class SearchLabeler : public Labeler {
public:
    std::vector<core::Claim> label_claims(std::vector<core::Claim> claims) override;
};

std::unique_ptr<Labeler> make_labeler(const PipelineConfig& config);

// Full front end for one prompt record: decompose, filter, anchor spans, and
// label when a labeler is configured.
std::vector<core::Claim> run_pipeline(gateway::Backend& backend, const PipelineConfig& config,
                                      const PromptRecord& record, Labeler* labeler);

// Collapses whitespace runs and trims; the join key used by FileLabeler.
std::string normalize_whitespace(const std::string& text);

// Longest common contiguous substring (by characters).
std::string longest_common_substring(const std::string& a, const std::string& b);

} // namespace halodet::pipeline
