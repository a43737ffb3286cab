#include "pushrl/algo/qnet.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pushrl/kernels/kernels.hpp"

namespace pushrl {

namespace {

// Uniform(-limit, limit) with the Glorot scaling for a [rows x cols] layer.
void init_weights(float* w, size_t rows, size_t cols, Rng& rng) {
    const float limit = std::sqrt(6.0f / static_cast<float>(rows + cols));
    for (size_t i = 0; i < rows * cols; ++i) {
        w[i] = rng.uniform_f32(-limit, limit);
    }
}

}  // namespace

QNet::QNet(const QNetConfig& config, uint64_t seed) : config_(config) {
    if (config_.obs_dim == 0 || config_.n_actions <= 0) {
        throw std::invalid_argument("qnet: obs_dim and n_actions must be set");
    }
    const size_t in = config_.obs_dim;
    const size_t out = static_cast<size_t>(config_.n_actions);
    const size_t h = static_cast<size_t>(config_.hidden);

    Rng rng(seed);
    if (h > 0) {
        b1_len_ = config_.bias ? h : 0;
        b2_len_ = config_.bias ? out : 0;
        w1_ = 0;
        b1_ = w1_ + h * in;
        w2_ = b1_ + b1_len_;
        b2_ = w2_ + out * h;
        params_.assign(b2_ + b2_len_, 0.0f);
        init_weights(params_.data() + w1_, h, in, rng);
        init_weights(params_.data() + w2_, out, h, rng);
    } else {
        b2_len_ = config_.bias ? out : 0;
        w2_ = 0;
        b2_ = w2_ + out * in;
        params_.assign(b2_ + b2_len_, 0.0f);
        init_weights(params_.data() + w2_, out, in, rng);
    }
}

void QNet::load_params(const float* data, size_t n) {
    if (n != params_.size()) {
        throw std::invalid_argument(
            "qnet: parameter size mismatch: got " + std::to_string(n) +
            ", expected " + std::to_string(params_.size()));
    }
    std::memcpy(params_.data(), data, n * sizeof(float));
}

void QNet::forward(const float* obs, Workspace& ws) const {
    const auto& k = kernels::ops();
    const size_t in = config_.obs_dim;
    const size_t out = static_cast<size_t>(config_.n_actions);
    const size_t h = static_cast<size_t>(config_.hidden);
    ws.q.resize(out);
    if (h > 0) {
        ws.h_pre.resize(h);
        ws.h.resize(h);
        const float* b1 = b1_len_ ? params_.data() + b1_ : nullptr;
        const float* b2 = b2_len_ ? params_.data() + b2_ : nullptr;
        k.gemv_bias(params_.data() + w1_, obs, b1, ws.h_pre.data(), h, in);
        k.relu(ws.h_pre.data(), ws.h.data(), h);
        k.gemv_bias(params_.data() + w2_, ws.h.data(), b2, ws.q.data(), out, h);
    } else {
        const float* b2 = b2_len_ ? params_.data() + b2_ : nullptr;
        k.gemv_bias(params_.data() + w2_, obs, b2, ws.q.data(), out, in);
    }
}

std::vector<float> QNet::qvalues(const std::vector<float>& obs) const {
    if (obs.size() != config_.obs_dim) {
        throw std::invalid_argument("qnet: observation size mismatch");
    }
    Workspace ws;
    forward(obs.data(), ws);
    return ws.q;
}

void QNet::backward(const float* obs, Workspace& ws, float* grad) const {
    const auto& k = kernels::ops();
    const size_t in = config_.obs_dim;
    const size_t out = static_cast<size_t>(config_.n_actions);
    const size_t h = static_cast<size_t>(config_.hidden);
    if (h > 0) {
        // Output layer: dW2 += dq h^T, db2 += dq, dh = W2^T dq.
        k.ger_accum(grad + w2_, ws.dq.data(), ws.h.data(), 1.0f, out, h);
        if (b2_len_) k.axpy(1.0f, ws.dq.data(), grad + b2_, out);
        ws.dh.resize(h);
        k.gemv_t(params_.data() + w2_, ws.dq.data(), ws.dh.data(), out, h);
        // Through the ReLU, then the input layer.
        k.relu_backward(ws.h_pre.data(), ws.dh.data(), ws.dh.data(), h);
        k.ger_accum(grad + w1_, ws.dh.data(), obs, 1.0f, h, in);
        if (b1_len_) k.axpy(1.0f, ws.dh.data(), grad + b1_, h);
    } else {
        k.ger_accum(grad + w2_, ws.dq.data(), obs, 1.0f, out, in);
        if (b2_len_) k.axpy(1.0f, ws.dq.data(), grad + b2_, out);
    }
}

void sync_target(const QNet& src, QNet& dst) {
    dst.load_params(src.params());
    dst.set_version(src.version());
}

int argmax_action(const float* q, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
        if (q[i] > q[best]) best = i;  // strict: lowest index wins ties
    }
    return best;
}

int epsilon_greedy(const std::vector<float>& q, float epsilon, Rng& rng) {
    if (epsilon > 0.0f && rng.uniform_f32() < epsilon) {
        return static_cast<int>(rng.bounded(q.size()));
    }
    return argmax_action(q.data(), static_cast<int>(q.size()));
}

}  // namespace pushrl
