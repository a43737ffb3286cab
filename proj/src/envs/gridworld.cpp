#include "gridworld.hpp"

#include <stdexcept>

namespace pushrl {

GridWorldEnv::GridWorldEnv(uint64_t seed, int max_steps) : rng_(seed) {
    spec_ = {"gridworld", static_cast<size_t>(kCells), 4,
             max_steps > 0 ? max_steps : 100};
}

std::vector<float> GridWorldEnv::reset(uint64_t seed) {
    rng_.reseed(seed);
    return reset();
}

std::vector<float> GridWorldEnv::reset() {
    cell_ = kStart;
    steps_ = 0;
    finished_ = false;
    return observe();
}

int GridWorldEnv::next_cell(int cell, int action) {
    const int row = cell / kSide;
    const int col = cell % kSide;
    int nrow = row, ncol = col;
    switch (action) {
        case 0: nrow = row - 1; break;  // up
        case 1: nrow = row + 1; break;  // down
        case 2: ncol = col - 1; break;  // left
        case 3: ncol = col + 1; break;  // right
        default: throw std::invalid_argument("gridworld: bad action");
    }
    if (nrow < 0 || nrow >= kSide || ncol < 0 || ncol >= kSide) {
        return cell;  // bumped a wall, stay put
    }
    return nrow * kSide + ncol;
}

float GridWorldEnv::move_reward(int next) {
    return next == kGoal ? kGoalReward : kStepReward;
}

StepResult GridWorldEnv::step(int action) {
    if (action < 0 || action >= spec_.n_actions) {
        throw std::invalid_argument("gridworld: action out of range: " +
                                    std::to_string(action));
    }
    if (finished_) {
        throw std::logic_error("gridworld: step() after episode end");
    }

    cell_ = next_cell(cell_, action);
    ++steps_;

    StepResult result;
    result.obs = observe();
    result.reward = move_reward(cell_);
    const bool at_goal = cell_ == kGoal;
    result.truncated = !at_goal && steps_ >= spec_.max_steps;
    result.done = at_goal || result.truncated;
    finished_ = result.done;
    return result;
}

std::vector<float> GridWorldEnv::observe() const {
    std::vector<float> obs(kCells, 0.0f);
    obs[cell_] = 1.0f;
    return obs;
}

}  // namespace pushrl
