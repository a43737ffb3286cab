#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pushrl::kernels {

// Dense f32 primitives behind the value/Q network.  Every operation has a
// scalar reference implementation and optional SIMD variants; the dispatcher
// picks the widest one the CPU supports at runtime.  All matrices are
// row-major [rows x cols]; no aliasing between inputs and outputs.
struct Ops {
    const char* name;

    // y = W x + b        (b may be null for bias-free layers)
    void (*gemv_bias)(const float* W, const float* x, const float* b, float* y,
                      size_t rows, size_t cols);
    // y = W^T g          (back-propagated input gradient)
    void (*gemv_t)(const float* W, const float* g, float* y, size_t rows,
                   size_t cols);
    // W += alpha * g x^T (rank-1 gradient accumulation)
    void (*ger_accum)(float* W, const float* g, const float* x, float alpha,
                      size_t rows, size_t cols);
    // y += a * x
    void (*axpy)(float a, const float* x, float* y, size_t n);
    float (*dot)(const float* a, const float* b, size_t n);
    // Elementwise; y == x (and dx == dy below) is allowed.
    void (*relu)(const float* x, float* y, size_t n);
    // dx = dy where pre > 0, else 0
    void (*relu_backward)(const float* pre, const float* dy, float* dx,
                          size_t n);
    // One Adam update over n parameters.  bc1/bc2 are the bias corrections
    // 1 - beta^t, precomputed by the caller once per step.
    void (*adam_step)(float* w, float* m, float* v, const float* g, size_t n,
                      float lr, float beta1, float beta2, float eps, float bc1,
                      float bc2);
};

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);

// Backends compiled in and usable on this CPU, widest last.
std::vector<Backend> supported_backends();

// Active table.  Default: widest supported backend, unless PUSHRL_KERNELS
// names one explicitly ("scalar", "avx2", "neon", or "auto").
const Ops& ops();
Backend active_backend();

// Table for a specific backend; throws std::runtime_error if it is not
// usable here.  Lets tests compare SIMD output against the scalar reference.
const Ops& ops(Backend b);

// Programmatic override, same semantics as the environment variable.
// Throws std::runtime_error on unknown or unsupported names.
void force_backend(const std::string& name);

}  // namespace pushrl::kernels
