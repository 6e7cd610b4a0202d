#include "halodet/core/split.hpp"

#include <cmath>
#include <unordered_set>

#include "halodet/core/error.hpp"
#include "halodet/core/rng.hpp"

namespace halodet::core {

namespace {

void validate_ratios(const SplitRatios& r) {
    for (double v : {r.train, r.validation, r.test}) {
        if (!(v > 0.0 && v < 1.0)) {
            throw invalid_input("split ratios must each lie in (0,1)");
        }
    }
    if (std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
        throw invalid_input("split ratios must sum to 1");
    }
}

// Shuffles ids, then cuts validation and test at floor(N * ratio) each; every
// remaining row (the train floor plus rounding remainder) goes to train.
void split_ids(std::vector<std::string> ids, const SplitRatios& ratios, Rng& rng,
               DatasetSplit& out) {
    rng.shuffle(ids);
    const auto n = ids.size();
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.validation));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test));
    const auto n_train = n - n_val - n_test;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train) {
            out.train.push_back(std::move(ids[i]));
        } else if (i < n_train + n_val) {
            out.validation.push_back(std::move(ids[i]));
        } else {
            out.test.push_back(std::move(ids[i]));
        }
    }
}

} // namespace

DatasetSplit split_dataset(const std::vector<Claim>& claims, SplitRatios ratios,
                           std::int64_t seed, bool stratified) {
    validate_ratios(ratios);
    if (claims.size() < 3) {
        throw invalid_input("split_dataset needs at least 3 claims, got " +
                            std::to_string(claims.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& c : claims) {
        if (!seen.insert(c.id).second) {
            throw invalid_input("duplicate claim id '" + c.id + "'");
        }
    }

    DatasetSplit split;
    split.seed = seed;
    Rng rng(static_cast<std::uint64_t>(seed));

    if (!stratified) {
        std::vector<std::string> ids;
        ids.reserve(claims.size());
        for (const auto& c : claims) ids.push_back(c.id);
        split_ids(std::move(ids), ratios, rng, split);
        return split;
    }

    // Stratified: apply the same rule inside each label group, in a fixed
    // label order so the overall result stays seed-deterministic.
    for (Label label : {Label::factual, Label::hallucinated, Label::unlabeled}) {
        std::vector<std::string> ids;
        for (const auto& c : claims) {
            if (c.label == label) ids.push_back(c.id);
        }
        if (!ids.empty()) {
            split_ids(std::move(ids), ratios, rng, split);
        }
    }
    return split;
}

} // namespace halodet::core
