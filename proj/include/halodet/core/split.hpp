#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "halodet/core/types.hpp"

namespace halodet::core {

struct SplitRatios {
    double train = 0.7;
    double validation = 0.2;
    double test = 0.1;
};

// Seeded uniform shuffle, then cut: validation and test take floor(N * ratio)
// rows each, train takes the rest (floor(N * train_ratio) plus any remainder).
// When stratified is set the rule is applied per label group.
DatasetSplit split_dataset(const std::vector<Claim>& claims, SplitRatios ratios,
                           std::int64_t seed, bool stratified = false);

} // namespace halodet::core
