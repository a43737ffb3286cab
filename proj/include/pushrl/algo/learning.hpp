#pragma once

#include <cstdint>
#include <vector>

#include "pushrl/algo/qnet.hpp"
#include "pushrl/core/types.hpp"

namespace pushrl {

struct AdamState {
    std::vector<float> m, v;
    uint64_t t = 0;

    explicit AdamState(size_t n) : m(n, 0.0f), v(n, 0.0f) {}
};

struct DqnHyper {
    float gamma = 0.99f;
    float lr = 5e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct TdResult {
    float delta = 0.0f;      // TD error of this transition
    float grad_norm = 0.0f;  // L2 norm of dQ(s,a)/dparams
};

// One temporal-difference(0) step on a single transition with plain SGD:
//   delta = r + gamma * max_a' Q(s', a') - Q(s, a)       (0 bootstrap if done)
//   params += alpha * delta * dQ(s, a)/dparams
// The bootstrap term is treated as a constant (semi-gradient).  For a
// single-output network this is exactly the classic state-value update.
// Bumps the network version.  Throws std::runtime_error without touching the
// parameters when delta is non-finite (divergence).
TdResult td0_update(QNet& net, const Transition& tr, float alpha, float gamma,
                    QNet::Workspace& ws, std::vector<float>& grad_scratch);

// One DQN step over a minibatch: targets y = r + gamma * max_a' Q_target
// (y = r on terminal transitions), MSE loss against Q(s, a), one Adam update.
// Bumps the network version once per batch.  Returns the minibatch MSE;
// throws std::runtime_error on a non-finite loss (divergence) without
// applying the step.
float dqn_update(QNet& net, const QNet& target,
                 const std::vector<Transition>& batch, AdamState& opt,
                 const DqnHyper& hp, QNet::Workspace& ws,
                 std::vector<float>& grad_scratch);

}  // namespace pushrl
