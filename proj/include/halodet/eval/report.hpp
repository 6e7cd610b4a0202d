#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "halodet/core/types.hpp"
#include "halodet/eval/metrics.hpp"

namespace halodet::eval {

// One claim's evaluation inputs after joining scores with labels.
struct ScoredClaim {
    std::string claim_id;
    double score = 0.0;       // P_factual
    bool gold_factual = false;
    std::optional<std::int64_t> response_length; // tokens, for stratification
};

struct LengthBounds {
    std::int64_t low = 500;
    std::int64_t high = 1000;
};

// Builds the confusion counts and metrics for fixed thresholds. Single mode
// passes alpha_low == alpha_high == tau (bacc_unknown omitted); dual mode
// fills bacc_unknown. Metrics are tolerant of degenerate inputs (a rate with
// an empty denominator contributes 0), which empty strata rely on; the strict
// bacc()/bacc_unknown() operations are unaffected.
core::EvalReport build_report(const std::vector<ScoredClaim>& claims, double alpha_low,
                              double alpha_high, bool dual);

// Adds sub-reports keyed by response length: lt<low>, <low>to<high> (both ends
// inclusive), gt<high>. Claims without a length go to an "unknown_length"
// stratum when present.
void add_length_strata(core::EvalReport& report, const std::vector<ScoredClaim>& claims,
                       double alpha_low, double alpha_high, bool dual,
                       LengthBounds bounds = {});

// Equal-width bins on [0, 1], last bin right-closed.
core::Histogram score_histogram(const std::vector<ScoredClaim>& claims, int n_bins = 20);

// Flat CSV (metric,stratum,value) for plotting.
std::string report_csv(const core::EvalReport& report);

// CSV with bin_low,bin_high,factual_count,hallucinated_count rows.
std::string histogram_csv(const core::Histogram& histogram);

// Shortest round-trip decimal formatting shared by the CSV emitters.
std::string format_double(double value);

} // namespace halodet::eval
