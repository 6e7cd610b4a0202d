#pragma once

#include <cstdint>
#include <vector>

namespace halodet::eval {

enum class TriClass { factual, hallucinated, unknown };

// factual iff p strictly exceeds tau.
TriClass classify(double p, double tau);

// factual iff p > alpha_high, hallucinated iff p < alpha_low, else unknown.
TriClass classify_tri(double p, double alpha_low, double alpha_high);

// Balanced accuracy, factual as the positive class:
// BAcc = 1/2 (TP/(TP+FN) + TN/(TN+FP)). Throws when either class is absent
// from the labels (the metric is undefined).
double bacc(const std::vector<TriClass>& predictions, const std::vector<bool>& gold_factual);

// Balanced accuracy of the hybrid pipeline: unknown predictions count as
// correct for their gold class, then correct-per-class rates are averaged.
double bacc_unknown(const std::vector<TriClass>& predictions,
                    const std::vector<bool>& gold_factual);

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t n_unknown = 0;
};

ConfusionCounts count_confusion(const std::vector<TriClass>& predictions,
                                const std::vector<bool>& gold_factual);

} // namespace halodet::eval
