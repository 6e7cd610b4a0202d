// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against; keep them simple sequential loops.

#include "halodet/kernels/kernels.hpp"

namespace halodet::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_scalar(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void relu_scalar(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_mask_scalar(const double* pre, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",       dot_scalar,  sum_scalar, axpy_scalar,
        scale_scalar,   add_scalar,  relu_scalar, relu_grad_mask_scalar,
    };
    return ops;
}

} // namespace halodet::kernels
