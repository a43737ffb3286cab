#include "pushrl/algo/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pushrl/kernels/kernels.hpp"

namespace pushrl {

namespace {

float max_q(const std::vector<float>& q) {
    return *std::max_element(q.begin(), q.end());
}

}  // namespace

TdResult td0_update(QNet& net, const Transition& tr, float alpha, float gamma,
                    QNet::Workspace& ws, std::vector<float>& grad_scratch) {
    // Bootstrap value of the successor state, detached.
    float v_next = 0.0f;
    if (!tr.done) {
        net.forward(tr.next_obs.data(), ws);
        v_next = max_q(ws.q);
    }
    net.forward(tr.obs.data(), ws);
    const float delta = tr.reward + gamma * v_next - ws.q[tr.action];
    if (!std::isfinite(delta)) {
        throw std::runtime_error("td0_update: diverged (non-finite TD error)");
    }

    grad_scratch.assign(net.param_count(), 0.0f);
    ws.dq.assign(ws.q.size(), 0.0f);
    ws.dq[tr.action] = 1.0f;  // grad of Q(s,a) itself
    net.backward(tr.obs.data(), ws, grad_scratch.data());
    const auto& k = kernels::ops();
    const float norm_sq =
        k.dot(grad_scratch.data(), grad_scratch.data(), net.param_count());
    k.axpy(alpha * delta, grad_scratch.data(), net.params().data(),
           net.param_count());
    net.bump_version();
    return {delta, std::sqrt(norm_sq)};
}

float dqn_update(QNet& net, const QNet& target,
                 const std::vector<Transition>& batch, AdamState& opt,
                 const DqnHyper& hp, QNet::Workspace& ws,
                 std::vector<float>& grad_scratch) {
    if (batch.empty()) {
        throw std::invalid_argument("dqn_update: empty batch");
    }
    if (opt.m.size() != net.param_count()) {
        throw std::invalid_argument("dqn_update: optimizer state size mismatch");
    }
    grad_scratch.assign(net.param_count(), 0.0f);
    const float inv_b = 1.0f / static_cast<float>(batch.size());

    float loss = 0.0f;
    QNet::Workspace tws;
    for (const Transition& tr : batch) {
        float y = tr.reward;
        if (!tr.done) {
            target.forward(tr.next_obs.data(), tws);
            y += hp.gamma * max_q(tws.q);
        }
        net.forward(tr.obs.data(), ws);
        const float err = ws.q[tr.action] - y;
        loss += err * err;
        ws.dq.assign(ws.q.size(), 0.0f);
        ws.dq[tr.action] = 2.0f * err * inv_b;  // d(mean squared error)/dq
        net.backward(tr.obs.data(), ws, grad_scratch.data());
    }

    loss *= inv_b;
    if (!std::isfinite(loss)) {
        throw std::runtime_error("dqn_update: diverged (non-finite loss)");
    }

    ++opt.t;
    const float bc1 = 1.0f - std::pow(hp.beta1, static_cast<float>(opt.t));
    const float bc2 = 1.0f - std::pow(hp.beta2, static_cast<float>(opt.t));
    kernels::ops().adam_step(net.params().data(), opt.m.data(), opt.v.data(),
                             grad_scratch.data(), net.param_count(), hp.lr,
                             hp.beta1, hp.beta2, hp.eps, bc1, bc2);
    net.bump_version();
    return loss;
}

}  // namespace pushrl
