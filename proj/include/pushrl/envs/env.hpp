#pragma once

#include <memory>
#include <string>

#include "pushrl/core/types.hpp"

namespace pushrl {

// Episodic environment with discrete actions.  Implementations own a
// deterministic RNG: construct/reset with the same seed and the same action
// sequence to replay an identical episode.
class Env {
public:
    virtual ~Env() = default;

    virtual const EnvSpec& spec() const = 0;

    // Reseed the environment's RNG and start a fresh episode.
    virtual std::vector<float> reset(uint64_t seed) = 0;

    // Start a fresh episode, continuing the existing RNG stream (episodes
    // differ, but the whole sequence is reproducible from the last seed).
    virtual std::vector<float> reset() = 0;

    // Advance one step.  Throws std::invalid_argument on an out-of-range
    // action and std::logic_error if called after the episode ended.
    virtual StepResult step(int action) = 0;
};

// Known names: "cartpole", "gridworld".  max_steps <= 0 selects the
// environment's default episode cap.  Throws std::invalid_argument on an
// unknown name.
std::unique_ptr<Env> make_env(const std::string& name, uint64_t seed,
                              int max_steps = 0);

}  // namespace pushrl
