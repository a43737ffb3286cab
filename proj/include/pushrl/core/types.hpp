#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pushrl {

// Static description of an environment, used for shape checks and for
// sizing the network input/output layers.
struct EnvSpec {
    std::string name;
    size_t obs_dim = 0;
    int n_actions = 0;
    int max_steps = 0;
};

// One (s, a, r, s', done) sample.  `done` marks a *terminal* state: episode
// ends that were cut off by the step limit keep done = false so the learner
// still bootstraps from next_obs, and report the cutoff via `truncated`.
struct Transition {
    std::vector<float> obs;
    int action = 0;
    float reward = 0.0f;
    std::vector<float> next_obs;
    bool done = false;
    bool truncated = false;
    uint64_t policy_version = 0;  // version of the policy that acted
    int64_t produced_at_ns = 0;   // steady-clock stamp at production
};

struct StepResult {
    std::vector<float> obs;
    float reward = 0.0f;
    bool done = false;       // terminal or truncated: episode is over
    bool truncated = false;  // ended only because of the step limit
};

struct Violation {
    enum class Kind { dimension_mismatch, action_out_of_range, non_finite };
    Kind kind;
    std::string detail;
};

// Checks a transition against the environment's shapes and bounds.  Returns
// every violation found rather than failing fast, so callers can log a full
// diagnosis of a malformed sample.
std::vector<Violation> validate_transition(const Transition& tr,
                                           const EnvSpec& spec);

const char* violation_kind_name(Violation::Kind kind);

}  // namespace pushrl
