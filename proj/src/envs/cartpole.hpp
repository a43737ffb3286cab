#pragma once

#include "pushrl/envs/env.hpp"
#include "pushrl/util/rng.hpp"

namespace pushrl {

// Classic cart-pole balancing task: push a cart left or right to keep the
// pole upright.  Euler-integrated dynamics with a 0.02 s timestep, reward 1
// per step, episode ends when the pole tips past 12 degrees, the cart leaves
// +-2.4, or the step cap is hit.
class CartPoleEnv final : public Env {
public:
    explicit CartPoleEnv(uint64_t seed, int max_steps);

    const EnvSpec& spec() const override { return spec_; }
    std::vector<float> reset(uint64_t seed) override;
    std::vector<float> reset() override;
    StepResult step(int action) override;

private:
    std::vector<float> observe() const;

    EnvSpec spec_;
    Rng rng_;
    double x_ = 0.0, x_dot_ = 0.0, theta_ = 0.0, theta_dot_ = 0.0;
    int steps_ = 0;
    bool finished_ = true;
};

}  // namespace pushrl
