// AVX2 kernels, 4 doubles per lane group. Compiled with -mavx2 -mfma
// -ffp-contract=off: remainder loops must round exactly like the scalar
// reference, so contraction is disabled and FMA appears only in the dot
// reduction where summation order already differs.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "halodet/kernels/kernels.hpp"

namespace halodet::kernels {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    }
    for (; i < n; ++i) x[i] *= a;
}

void add_avx2(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void relu_avx2(double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_mask_avx2(const double* pre, double* grad, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), mask));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

} // namespace

const Ops& avx2_ops() {
    static const Ops ops{
        "avx2",     dot_avx2,  sum_avx2,  axpy_avx2,
        scale_avx2, add_avx2,  relu_avx2, relu_grad_mask_avx2,
    };
    return ops;
}

} // namespace halodet::kernels

#endif // x86-64
