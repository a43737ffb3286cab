#include "backends.hpp"

// NEON variants for aarch64, 4 floats per vector.  NEON is baseline on
// aarch64 so no extra compile flags or cpuid checks are needed there.

#if defined(__ARM_NEON) && defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace pushrl::kernels {
namespace {

void gemv_bias_neon(const float* W, const float* x, const float* b, float* y,
                    size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        const float* row = W + r * cols;
        float32x4_t acc = vdupq_n_f32(0.0f);
        size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            acc = vfmaq_f32(acc, vld1q_f32(row + c), vld1q_f32(x + c));
        }
        float sum = vaddvq_f32(acc);
        for (; c < cols; ++c) sum += row[c] * x[c];
        y[r] = b ? sum + b[r] : sum;
    }
}

void gemv_t_neon(const float* W, const float* g, float* y, size_t rows,
                 size_t cols) {
    for (size_t c = 0; c < cols; ++c) y[c] = 0.0f;
    for (size_t r = 0; r < rows; ++r) {
        const float* row = W + r * cols;
        const float32x4_t gr = vdupq_n_f32(g[r]);
        size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            vst1q_f32(y + c, vfmaq_f32(vld1q_f32(y + c), gr, vld1q_f32(row + c)));
        }
        for (; c < cols; ++c) y[c] += g[r] * row[c];
    }
}

void ger_accum_neon(float* W, const float* g, const float* x, float alpha,
                    size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        float* row = W + r * cols;
        const float ag = alpha * g[r];
        const float32x4_t agv = vdupq_n_f32(ag);
        size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            vst1q_f32(row + c, vfmaq_f32(vld1q_f32(row + c), agv, vld1q_f32(x + c)));
        }
        for (; c < cols; ++c) row[c] += ag * x[c];
    }
}

void axpy_neon(float a, const float* x, float* y, size_t n) {
    const float32x4_t av = vdupq_n_f32(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), av, vld1q_f32(x + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_neon(const float* a, const float* b, size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float sum = vaddvq_f32(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void relu_neon(const float* x, float* y, size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(y + i, vmaxq_f32(vld1q_f32(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_neon(const float* pre, const float* dy, float* dx,
                        size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const uint32x4_t mask = vcgtq_f32(vld1q_f32(pre + i), zero);
        const float32x4_t dyv = vld1q_f32(dy + i);
        vst1q_f32(dx + i,
                  vreinterpretq_f32_u32(
                      vandq_u32(mask, vreinterpretq_u32_f32(dyv))));
    }
    for (; i < n; ++i) dx[i] = pre[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_step_neon(float* w, float* m, float* v, const float* g, size_t n,
                    float lr, float beta1, float beta2, float eps, float bc1,
                    float bc2) {
    const float32x4_t b1 = vdupq_n_f32(beta1);
    const float32x4_t b2 = vdupq_n_f32(beta2);
    const float32x4_t omb1 = vdupq_n_f32(1.0f - beta1);
    const float32x4_t omb2 = vdupq_n_f32(1.0f - beta2);
    const float32x4_t bc1v = vdupq_n_f32(bc1);
    const float32x4_t bc2v = vdupq_n_f32(bc2);
    const float32x4_t epsv = vdupq_n_f32(eps);
    const float32x4_t lrv = vdupq_n_f32(lr);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t gi = vld1q_f32(g + i);
        float32x4_t mi = vfmaq_f32(vmulq_f32(omb1, gi), b1, vld1q_f32(m + i));
        float32x4_t vi = vfmaq_f32(vmulq_f32(omb2, vmulq_f32(gi, gi)), b2,
                                   vld1q_f32(v + i));
        vst1q_f32(m + i, mi);
        vst1q_f32(v + i, vi);
        const float32x4_t mhat = vdivq_f32(mi, bc1v);
        const float32x4_t vhat = vdivq_f32(vi, bc2v);
        const float32x4_t denom = vaddq_f32(vsqrtq_f32(vhat), epsv);
        const float32x4_t step = vdivq_f32(vmulq_f32(lrv, mhat), denom);
        vst1q_f32(w + i, vsubq_f32(vld1q_f32(w + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
        const float mhat = m[i] / bc1;
        const float vhat = v[i] / bc2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

const Ops table = {
    "neon",         gemv_bias_neon, gemv_t_neon,
    ger_accum_neon, axpy_neon,      dot_neon,
    relu_neon,      relu_backward_neon, adam_step_neon,
};

}  // namespace

namespace detail {
const Ops* neon_table() { return &table; }
}  // namespace detail

}  // namespace pushrl::kernels

#else  // not aarch64

namespace pushrl::kernels::detail {
const Ops* neon_table() { return nullptr; }
}  // namespace pushrl::kernels::detail

#endif
