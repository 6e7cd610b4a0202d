// NEON kernels for aarch64, 2 doubles per vector. Same contract as the AVX2
// variant: elementwise ops bit-identical to scalar, reductions within
// tolerance.

#if defined(__aarch64__)

#include <arm_neon.h>

#include "halodet/kernels/kernels.hpp"

namespace halodet::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vaddq_f64(acc, vld1q_f64(x + i));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double* x, double a, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
    }
    for (; i < n; ++i) x[i] *= a;
}

void add_neon(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void relu_neon(double* x, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        uint64x2_t gt = vcgtq_f64(v, zero);
        vst1q_f64(x + i, vbslq_f64(gt, v, zero));
    }
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_mask_neon(const double* pre, double* grad, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t gt = vcgtq_f64(vld1q_f64(pre + i), zero);
        float64x2_t g = vld1q_f64(grad + i);
        vst1q_f64(grad + i, vbslq_f64(gt, g, zero));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

} // namespace

const Ops& neon_ops() {
    static const Ops ops{
        "neon",     dot_neon,  sum_neon,  axpy_neon,
        scale_neon, add_neon,  relu_neon, relu_grad_mask_neon,
    };
    return ops;
}

} // namespace halodet::kernels

#endif // aarch64
