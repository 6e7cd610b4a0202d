#include "halodet/eval/threshold.hpp"

#include <algorithm>
#include <sstream>

#include "halodet/core/error.hpp"
#include "halodet/eval/metrics.hpp"

namespace halodet::eval {

namespace {

constexpr double kOutside = 1e-9; // half-width of the outside candidates

struct SortedScores {
    std::vector<double> values;        // ascending
    std::vector<std::int64_t> cum_factual; // cum_factual[i] = # factual among values[0..i)
    std::int64_t total_factual = 0;
    std::int64_t total_hallucinated = 0;

    // # factual / hallucinated with score strictly greater than c.
    std::pair<std::int64_t, std::int64_t> greater_than(double c) const {
        const auto idx = static_cast<std::size_t>(
            std::upper_bound(values.begin(), values.end(), c) - values.begin());
        const std::int64_t f = total_factual - cum_factual[idx];
        const std::int64_t h = static_cast<std::int64_t>(values.size() - idx) - f;
        return {f, h};
    }

    // # factual / hallucinated with score strictly less than c.
    std::pair<std::int64_t, std::int64_t> less_than(double c) const {
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(values.begin(), values.end(), c) - values.begin());
        const std::int64_t f = cum_factual[idx];
        const std::int64_t h = static_cast<std::int64_t>(idx) - f;
        return {f, h};
    }
};

SortedScores sort_scores(const std::vector<double>& scores,
                         const std::vector<bool>& gold_factual) {
    if (scores.size() != gold_factual.size()) {
        throw invalid_input("scores and labels differ in length");
    }
    if (scores.empty()) {
        throw invalid_input("threshold search needs at least one scored claim");
    }
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    SortedScores s;
    s.values.reserve(scores.size());
    s.cum_factual.resize(scores.size() + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        s.values.push_back(scores[order[i]]);
        s.cum_factual[i + 1] = s.cum_factual[i] + (gold_factual[order[i]] ? 1 : 0);
        if (gold_factual[order[i]]) {
            ++s.total_factual;
        } else {
            ++s.total_hallucinated;
        }
    }
    if (s.total_factual == 0 || s.total_hallucinated == 0) {
        throw invalid_input("threshold search is undefined: labels contain a single class");
    }
    return s;
}

double bacc_at(const SortedScores& s, double tau) {
    const auto [tp, fp] = s.greater_than(tau);
    const std::int64_t fn = s.total_factual - tp;
    const std::int64_t tn = s.total_hallucinated - fp;
    (void)fn;
    return 0.5 * (static_cast<double>(tp) / static_cast<double>(s.total_factual) +
                  static_cast<double>(tn) / static_cast<double>(s.total_hallucinated));
}

} // namespace

std::vector<double> threshold_candidates(const std::vector<double>& scores) {
    std::vector<double> distinct(scores);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.reserve(distinct.size() + 1);
    candidates.push_back(distinct.empty() ? -kOutside : distinct.front() - kOutside);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    }
    if (!distinct.empty()) {
        candidates.push_back(distinct.back() + kOutside);
    }
    return candidates;
}

ThresholdSearch search_threshold(const std::vector<double>& scores,
                                 const std::vector<bool>& gold_factual) {
    const SortedScores s = sort_scores(scores, gold_factual);
    ThresholdSearch best;
    bool first = true;
    for (double c : threshold_candidates(scores)) {
        const double value = bacc_at(s, c);
        if (first || value > best.bacc) { // ties keep the smallest tau
            best.tau = c;
            best.bacc = value;
            first = false;
        }
    }
    return best;
}

DualThresholdSearch search_dual_thresholds(const std::vector<double>& scores,
                                           const std::vector<bool>& gold_factual,
                                           double min_bacc) {
    const SortedScores s = sort_scores(scores, gold_factual);
    const auto candidates = threshold_candidates(scores);
    const std::int64_t n = s.total_factual + s.total_hallucinated;

    // Precompute strict-order counts per candidate so every pair is O(1).
    std::vector<std::int64_t> f_gt(candidates.size()), h_gt(candidates.size());
    std::vector<std::int64_t> f_lt(candidates.size()), h_lt(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::tie(f_gt[i], h_gt[i]) = s.greater_than(candidates[i]);
        std::tie(f_lt[i], h_lt[i]) = s.less_than(candidates[i]);
    }

    struct Candidate {
        DualThresholdSearch result;
        bool feasible = false;
        bool valid = false;
    };
    Candidate best;          // best feasible pair
    Candidate unconstrained; // best pair ignoring the feasibility floor

    auto better = [](const DualThresholdSearch& a, const DualThresholdSearch& b) {
        if (a.bacc_unknown != b.bacc_unknown) return a.bacc_unknown > b.bacc_unknown;
        if (a.n_unknown != b.n_unknown) return a.n_unknown < b.n_unknown;
        return (a.alpha_high - a.alpha_low) < (b.alpha_high - b.alpha_low);
    };

    for (std::size_t lo = 0; lo < candidates.size(); ++lo) {
        for (std::size_t hi = lo; hi < candidates.size(); ++hi) {
            const std::int64_t tp = f_gt[hi];        // factual predicted factual
            const std::int64_t fn = f_lt[lo];        // factual predicted hallucinated
            const std::int64_t tn = h_lt[lo];        // hallucinated predicted hallucinated
            const std::int64_t fp = h_gt[hi];        // hallucinated predicted factual
            const std::int64_t unknown = n - tp - fn - tn - fp;

            DualThresholdSearch r;
            r.alpha_low = candidates[lo];
            r.alpha_high = candidates[hi];
            r.n_unknown = unknown;
            const std::int64_t unknown_factual = s.total_factual - tp - fn;
            const std::int64_t unknown_hallucinated = s.total_hallucinated - tn - fp;
            r.bacc_unknown =
                0.5 * (static_cast<double>(tp + unknown_factual) /
                           static_cast<double>(s.total_factual) +
                       static_cast<double>(tn + unknown_hallucinated) /
                           static_cast<double>(s.total_hallucinated));

            // The feasibility floor is evaluated over decided claims only;
            // pairs where a decided class is empty are infeasible outright.
            bool feasible = false;
            if (tp + fn > 0 && tn + fp > 0) {
                r.decided_bacc =
                    0.5 * (static_cast<double>(tp) / static_cast<double>(tp + fn) +
                           static_cast<double>(tn) / static_cast<double>(tn + fp));
                feasible = r.decided_bacc > min_bacc;
            } else {
                r.decided_bacc = 0.0;
            }

            if (!unconstrained.valid || better(r, unconstrained.result)) {
                unconstrained.result = r;
                unconstrained.valid = true;
            }
            if (feasible && (!best.valid || better(r, best.result))) {
                best.result = r;
                best.valid = true;
            }
        }
    }

    if (!best.valid) {
        std::ostringstream msg;
        msg << "no threshold pair reaches BAcc > " << min_bacc
            << " on decided claims; best unconstrained pair: alpha_low="
            << unconstrained.result.alpha_low
            << " alpha_high=" << unconstrained.result.alpha_high
            << " bacc_unknown=" << unconstrained.result.bacc_unknown
            << " decided_bacc=" << unconstrained.result.decided_bacc;
        throw Error(ErrorKind::infeasible_constraint, msg.str());
    }
    return best.result;
}

} // namespace halodet::eval
