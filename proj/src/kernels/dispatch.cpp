#include <cstdlib>
#include <cstring>
#include <iostream>

#include "halodet/kernels/kernels.hpp"

namespace halodet::kernels {

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

namespace {

const Ops& pick_default() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return avx2_ops();
#elif defined(__aarch64__)
    return neon_ops();
#endif
    return scalar_ops();
}

const Ops& pick() {
    if (const char* env = std::getenv("HALODET_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(env, "avx2") == 0) {
            if (avx2_supported()) return avx2_ops();
            std::cerr << "halodet: HALODET_KERNELS=avx2 requested but AVX2+FMA not available, "
                         "using scalar kernels\n";
            return scalar_ops();
        }
#endif
#if defined(__aarch64__)
        if (std::strcmp(env, "neon") == 0) return neon_ops();
#endif
        std::cerr << "halodet: unknown HALODET_KERNELS value '" << env
                  << "', using default selection\n";
    }
    return pick_default();
}

} // namespace

const Ops& active() {
    static const Ops& chosen = pick();
    return chosen;
}

std::string active_name() { return active().name; }

std::vector<const Ops*> runnable_variants() {
    std::vector<const Ops*> variants{&scalar_ops()};
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) variants.push_back(&avx2_ops());
#endif
#if defined(__aarch64__)
    variants.push_back(&neon_ops());
#endif
    return variants;
}

} // namespace halodet::kernels
