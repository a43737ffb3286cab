#include "backends.hpp"

// AVX2+FMA variants, 8 floats per vector.  This file is compiled with
// -mavx2 -mfma; the dispatcher only hands out this table after checking
// cpuid, so nothing here runs on CPUs without the features.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace pushrl::kernels {
namespace {

inline float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

void gemv_bias_avx2(const float* W, const float* x, const float* b, float* y,
                    size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        const float* row = W + r * cols;
        __m256 acc = _mm256_setzero_ps();
        size_t c = 0;
        for (; c + 8 <= cols; c += 8) {
            acc = _mm256_fmadd_ps(_mm256_loadu_ps(row + c),
                                  _mm256_loadu_ps(x + c), acc);
        }
        float sum = hsum256(acc);
        for (; c < cols; ++c) sum += row[c] * x[c];
        y[r] = b ? sum + b[r] : sum;
    }
}

void gemv_t_avx2(const float* W, const float* g, float* y, size_t rows,
                 size_t cols) {
    size_t c = 0;
    for (; c + 8 <= cols; c += 8) _mm256_storeu_ps(y + c, _mm256_setzero_ps());
    for (; c < cols; ++c) y[c] = 0.0f;
    for (size_t r = 0; r < rows; ++r) {
        const float* row = W + r * cols;
        const __m256 gr = _mm256_set1_ps(g[r]);
        c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 acc = _mm256_fmadd_ps(gr, _mm256_loadu_ps(row + c),
                                         _mm256_loadu_ps(y + c));
            _mm256_storeu_ps(y + c, acc);
        }
        const float grs = g[r];
        for (; c < cols; ++c) y[c] += grs * row[c];
    }
}

void ger_accum_avx2(float* W, const float* g, const float* x, float alpha,
                    size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r) {
        float* row = W + r * cols;
        const float ag = alpha * g[r];
        const __m256 agv = _mm256_set1_ps(ag);
        size_t c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 acc = _mm256_fmadd_ps(agv, _mm256_loadu_ps(x + c),
                                         _mm256_loadu_ps(row + c));
            _mm256_storeu_ps(row + c, acc);
        }
        for (; c < cols; ++c) row[c] += ag * x[c];
    }
}

void axpy_avx2(float a, const float* x, float* y, size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 acc =
            _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
        _mm256_storeu_ps(y + i, acc);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_avx2(const float* a, const float* b, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                              acc);
    }
    float sum = hsum256(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void relu_avx2(const float* x, float* y, size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_avx2(const float* pre, const float* dy, float* dx,
                        size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
    }
    for (; i < n; ++i) dx[i] = pre[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_step_avx2(float* w, float* m, float* v, const float* g, size_t n,
                    float lr, float beta1, float beta2, float eps, float bc1,
                    float bc2) {
    const __m256 b1 = _mm256_set1_ps(beta1);
    const __m256 b2 = _mm256_set1_ps(beta2);
    const __m256 one_minus_b1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 one_minus_b2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 bc1v = _mm256_set1_ps(bc1);
    const __m256 bc2v = _mm256_set1_ps(bc2);
    const __m256 epsv = _mm256_set1_ps(eps);
    const __m256 lrv = _mm256_set1_ps(lr);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gi = _mm256_loadu_ps(g + i);
        __m256 mi = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i),
                                    _mm256_mul_ps(one_minus_b1, gi));
        __m256 vi = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i),
                                    _mm256_mul_ps(one_minus_b2,
                                                  _mm256_mul_ps(gi, gi)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 mhat = _mm256_div_ps(mi, bc1v);
        const __m256 vhat = _mm256_div_ps(vi, bc2v);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, mhat), denom);
        _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
        const float mhat = m[i] / bc1;
        const float vhat = v[i] / bc2;
        w[i] -= lr * mhat / (__builtin_sqrtf(vhat) + eps);
    }
}

const Ops table = {
    "avx2",         gemv_bias_avx2, gemv_t_avx2,
    ger_accum_avx2, axpy_avx2,      dot_avx2,
    relu_avx2,      relu_backward_avx2, adam_step_avx2,
};

}  // namespace

namespace detail {
const Ops* avx2_table() { return &table; }
}  // namespace detail

}  // namespace pushrl::kernels

#else  // no AVX2/FMA for this target

namespace pushrl::kernels::detail {
const Ops* avx2_table() { return nullptr; }
}  // namespace pushrl::kernels::detail

#endif
