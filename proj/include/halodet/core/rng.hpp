#pragma once

#include <cstdint>
#include <vector>

namespace halodet::core {

// SplitMix64 generator. Self-contained so that seeded results are identical
// across platforms and standard library implementations; every piece of
// randomness in the toolkit flows through explicit seeds into one of these.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace halodet::core
