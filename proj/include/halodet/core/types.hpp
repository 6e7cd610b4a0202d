#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace halodet::core {

enum class Label { factual, hallucinated, unlabeled };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

// One atomized factual statement extracted from a long-form response.
struct Claim {
    std::string id;
    std::string prompt_id;
    std::string text;
    std::optional<std::string> original_span; // contiguous substring of the source response
    Label label = Label::unlabeled;
    bool relevant = true;

    bool operator==(const Claim&) const = default;
};

// Per-token probability/entropy record; raw material for the signal estimators.
struct TokenScore {
    std::string token_text;
    double probability = 1.0; // in (0, 1]
    double entropy = 0.0;     // nats, >= 0
    bool is_entity = false;

    bool operator==(const TokenScore&) const = default;
};

// A detector's factuality confidence for one claim.
struct DetectorScore {
    std::string claim_id;
    std::string detector_id;
    double p_factual = 0.0; // in [0, 1]
    std::optional<std::string> rationale;

    bool operator==(const DetectorScore&) const = default;
};

enum class TaskKind { detect, qa };

std::string to_string(TaskKind task);
TaskKind task_from_string(const std::string& s);

// One instruction-tuning record. For task == detect the output begins with
// exactly "True" or "False" so the label stays a single first token.
struct FineTuneExample {
    std::string instruction;
    std::string input;
    std::string output;
    TaskKind task = TaskKind::detect;
    std::string source_claim_id;

    bool operator==(const FineTuneExample&) const = default;
};

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::int64_t seed = 0;

    bool operator==(const DatasetSplit&) const = default;
};

struct Histogram {
    std::vector<double> bin_edges; // n_bins + 1 edges over [0, 1]
    std::vector<std::int64_t> factual_counts;
    std::vector<std::int64_t> hallucinated_counts;

    bool operator==(const Histogram&) const = default;
};

// Confusion counts, metrics, thresholds and optional stratified sub-reports.
struct EvalReport {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t n_unknown = 0;
    double bacc = 0.0;
    std::optional<double> bacc_unknown;
    std::optional<double> tau;        // single-threshold mode
    std::optional<double> alpha_low;  // dual-threshold mode
    std::optional<double> alpha_high;
    std::map<std::string, EvalReport> strata;
    std::optional<Histogram> histogram;
    std::optional<std::string> length_source; // tokenizer provenance for strata

    std::int64_t total() const { return tp + fn + tn + fp + n_unknown; }
};

} // namespace halodet::core
