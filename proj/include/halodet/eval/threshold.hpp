#pragma once

#include <cstdint>
#include <vector>

namespace halodet::eval {

struct ThresholdSearch {
    double tau = 0.5;
    double bacc = 0.0;
};

// Exact single-threshold search: BAcc is piecewise constant between adjacent
// distinct scores, so candidates are midpoints of adjacent distinct sorted
// scores plus one candidate below and one above the score range. Ties break
// toward the smallest tau.
ThresholdSearch search_threshold(const std::vector<double>& scores,
                                 const std::vector<bool>& gold_factual);

struct DualThresholdSearch {
    double alpha_low = 0.5;
    double alpha_high = 0.5;
    double bacc_unknown = 0.0;
    double decided_bacc = 0.0; // BAcc over non-unknown claims
    std::int64_t n_unknown = 0;
};

// Exhaustive search over candidate pairs (alpha_low <= alpha_high, same
// candidate set as the single search). Feasible pairs keep BAcc over decided
// claims strictly above min_bacc; among them the pair maximizing BAcc-unknown
// wins, ties broken by fewest unknowns, then smallest alpha_high - alpha_low.
// Throws an infeasible-constraint error reporting the best unconstrained pair
// when no pair satisfies the floor.
DualThresholdSearch search_dual_thresholds(const std::vector<double>& scores,
                                           const std::vector<bool>& gold_factual,
                                           double min_bacc = 0.70);

// Shared candidate-threshold set (sorted ascending).
std::vector<double> threshold_candidates(const std::vector<double>& scores);

} // namespace halodet::eval
