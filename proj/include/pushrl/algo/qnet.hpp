#pragma once

#include <cstdint>
#include <vector>

#include "pushrl/util/rng.hpp"

namespace pushrl {

struct QNetConfig {
    size_t obs_dim = 0;
    int n_actions = 0;
    int hidden = 256;  // 0 = single linear layer
    bool bias = true;
};

// Value network: obs -> Linear -> ReLU -> Linear -> q[n_actions], or a lone
// linear layer when hidden == 0.  All parameters live in one flat f32 vector
// (weights row-major, biases appended per layer) so snapshotting, loading
// and optimizer steps are single contiguous operations.  With n_actions == 1
// this is a plain state-value function.
class QNet {
public:
    QNet(const QNetConfig& config, uint64_t seed);

    const QNetConfig& config() const { return config_; }
    size_t param_count() const { return params_.size(); }
    const std::vector<float>& params() const { return params_; }
    std::vector<float>& params() { return params_; }

    // Incremented once per applied update; carried along with parameter
    // snapshots so consumers can tell how fresh a policy is.
    uint64_t version() const { return version_; }
    void set_version(uint64_t v) { version_ = v; }
    void bump_version() { ++version_; }

    // Loads a flat parameter vector; throws std::invalid_argument on a size
    // mismatch (that means sender and receiver disagree on architecture).
    void load_params(const float* data, size_t n);
    void load_params(const std::vector<float>& p) {
        load_params(p.data(), p.size());
    }

    // Scratch buffers reused across forward/backward calls so the hot loops
    // never allocate.
    struct Workspace {
        std::vector<float> h_pre, h, q, dq, dh;
    };

    // Fills ws.q with the action values for obs (length obs_dim).
    void forward(const float* obs, Workspace& ws) const;

    // Convenience allocating variant for tests and one-off evaluation.
    std::vector<float> qvalues(const std::vector<float>& obs) const;

    // Backward pass for the last forward() on ws: takes dLoss/dq in ws.dq
    // and accumulates dLoss/dparams into grad (flat, same layout as params).
    void backward(const float* obs, Workspace& ws, float* grad) const;

private:
    QNetConfig config_;
    uint64_t version_ = 0;
    std::vector<float> params_;
    // Offsets into params_ for each tensor; length 0 when absent.
    size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0;
    size_t b1_len_ = 0, b2_len_ = 0;
};

// Copies parameters from src into dst (the periodic target-network refresh).
void sync_target(const QNet& src, QNet& dst);

// Epsilon-greedy over a q-vector: with probability epsilon a uniform random
// action, otherwise the argmax (lowest index wins ties).
int epsilon_greedy(const std::vector<float>& q, float epsilon, Rng& rng);

int argmax_action(const float* q, int n);

}  // namespace pushrl
