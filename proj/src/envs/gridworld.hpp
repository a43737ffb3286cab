#pragma once

#include "pushrl/envs/env.hpp"
#include "pushrl/util/rng.hpp"

namespace pushrl {

// Deterministic 4x4 grid: start in the top-left cell, reach the bottom-right
// cell.  Observations are a 16-dim one-hot of the current cell.  Moving into
// a wall leaves the agent in place.  Each non-goal step costs -0.01; the
// step that enters the goal pays +1.  Small and fully known, so tests can
// compare learned values against exact dynamic programming.
class GridWorldEnv final : public Env {
public:
    static constexpr int kSide = 4;
    static constexpr int kCells = kSide * kSide;
    static constexpr int kStart = 0;
    static constexpr int kGoal = kCells - 1;
    static constexpr float kStepReward = -0.01f;
    static constexpr float kGoalReward = 1.0f;

    explicit GridWorldEnv(uint64_t seed, int max_steps);

    const EnvSpec& spec() const override { return spec_; }
    std::vector<float> reset(uint64_t seed) override;
    std::vector<float> reset() override;
    StepResult step(int action) override;

    // Transition function exposed for exact-solution oracles: next cell for
    // (cell, action) and the reward collected on that move.
    static int next_cell(int cell, int action);
    static float move_reward(int next);

private:
    std::vector<float> observe() const;

    EnvSpec spec_;
    Rng rng_;
    int cell_ = kStart;
    int steps_ = 0;
    bool finished_ = true;
};

}  // namespace pushrl
