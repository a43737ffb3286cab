#include "pushrl/envs/env.hpp"

#include <stdexcept>

#include "cartpole.hpp"
#include "gridworld.hpp"

namespace pushrl {

std::unique_ptr<Env> make_env(const std::string& name, uint64_t seed,
                              int max_steps) {
    if (name == "cartpole") {
        return std::make_unique<CartPoleEnv>(seed, max_steps);
    }
    if (name == "gridworld") {
        return std::make_unique<GridWorldEnv>(seed, max_steps);
    }
    throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace pushrl
