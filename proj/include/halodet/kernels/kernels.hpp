#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Dense double-precision primitives behind the probe trainer and embedding
// math. A scalar reference implementation always exists; AVX2 (x86-64) and
// NEON (aarch64) variants are compiled per-architecture and selected once at
// runtime. Elementwise kernels are bit-identical to the scalar reference;
// reductions (dot, sum) may differ in summation order and are
// equivalence-tested against the reference within tolerance.
namespace halodet::kernels {

struct Ops {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n); // y += a * x
    void (*scale)(double* x, double a, std::size_t n);                 // x *= a
    void (*add)(double* acc, const double* x, std::size_t n);         // acc += x
    void (*relu)(double* x, std::size_t n);                            // x = max(x, 0)
    void (*relu_grad_mask)(const double* pre, double* grad, std::size_t n); // grad *= (pre > 0)
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
bool avx2_supported();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Variant chosen at first use: HALODET_KERNELS=scalar|avx2|neon overrides,
// otherwise the widest supported instruction set wins.
const Ops& active();
std::string active_name();

// All variants compiled in and runnable on this machine (scalar first).
std::vector<const Ops*> runnable_variants();

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(a, x.data(), y.data(), x.size());
}

inline void scale(std::span<double> x, double a) { active().scale(x.data(), a, x.size()); }

inline void add(std::span<double> acc, std::span<const double> x) {
    assert(acc.size() == x.size());
    active().add(acc.data(), x.data(), x.size());
}

inline void relu(std::span<double> x) { active().relu(x.data(), x.size()); }

inline void relu_grad_mask(std::span<const double> pre, std::span<double> grad) {
    assert(pre.size() == grad.size());
    active().relu_grad_mask(pre.data(), grad.data(), pre.size());
}

// out = W x + bias, W row-major [rows x cols]; bias may be null.
inline void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
                   const double* bias, double* out) {
    const Ops& ops = active();
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = ops.dot(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
    }
}

// out = W^T v, W row-major [rows x cols], v length rows, out length cols.
inline void matvec_transposed(const double* w, std::size_t rows, std::size_t cols,
                              const double* v, double* out) {
    const Ops& ops = active();
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        ops.axpy(v[r], w + r * cols, out, cols);
    }
}

} // namespace halodet::kernels
