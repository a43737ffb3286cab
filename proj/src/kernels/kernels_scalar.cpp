#include <cmath>

#include "backends.hpp"

// Reference implementations.  Deliberately plain loops: these define the
// semantics that the SIMD variants are equivalence-tested against.

namespace pushrl::kernels {
namespace {

void gemv_bias_scalar(const float* W, const float* x, const float* b, float* y,
                      size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        float acc = b ? b[r] : 0.0f;
        const float* row = W + r * cols;
        for (size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void gemv_t_scalar(const float* W, const float* g, float* y, size_t rows,
                   size_t cols) {
    for (size_t c = 0; c < cols; ++c) y[c] = 0.0f;
    for (size_t r = 0; r < rows; ++r) {
        const float* row = W + r * cols;
        const float gr = g[r];
        for (size_t c = 0; c < cols; ++c) y[c] += gr * row[c];
    }
}

void ger_accum_scalar(float* W, const float* g, const float* x, float alpha,
                      size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        float* row = W + r * cols;
        const float ag = alpha * g[r];
        for (size_t c = 0; c < cols; ++c) row[c] += ag * x[c];
    }
}

void axpy_scalar(float a, const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

float dot_scalar(const float* a, const float* b, size_t n) {
    float acc = 0.0f;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void relu_scalar(const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_scalar(const float* pre, const float* dy, float* dx,
                          size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = pre[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_step_scalar(float* w, float* m, float* v, const float* g, size_t n,
                      float lr, float beta1, float beta2, float eps, float bc1,
                      float bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
        const float mhat = m[i] / bc1;
        const float vhat = v[i] / bc2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

const Ops table = {
    "scalar",        gemv_bias_scalar, gemv_t_scalar,
    ger_accum_scalar, axpy_scalar,     dot_scalar,
    relu_scalar,     relu_backward_scalar, adam_step_scalar,
};

}  // namespace

namespace detail {
const Ops* scalar_table() { return &table; }
}  // namespace detail

}  // namespace pushrl::kernels
