#include "pushrl/core/types.hpp"

#include <cmath>

namespace pushrl {

namespace {

bool all_finite(const std::vector<float>& v) {
    for (float x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

std::vector<Violation> validate_transition(const Transition& tr,
                                           const EnvSpec& spec) {
    std::vector<Violation> out;
    if (tr.obs.size() != spec.obs_dim) {
        out.push_back({Violation::Kind::dimension_mismatch,
                       "obs has " + std::to_string(tr.obs.size()) +
                           " elements, expected " +
                           std::to_string(spec.obs_dim)});
    }
    if (tr.next_obs.size() != spec.obs_dim) {
        out.push_back({Violation::Kind::dimension_mismatch,
                       "next_obs has " + std::to_string(tr.next_obs.size()) +
                           " elements, expected " +
                           std::to_string(spec.obs_dim)});
    }
    if (tr.action < 0 || tr.action >= spec.n_actions) {
        out.push_back({Violation::Kind::action_out_of_range,
                       "action " + std::to_string(tr.action) +
                           " outside [0, " + std::to_string(spec.n_actions) +
                           ")"});
    }
    if (!std::isfinite(tr.reward)) {
        out.push_back({Violation::Kind::non_finite, "reward is not finite"});
    }
    if (!all_finite(tr.obs)) {
        out.push_back({Violation::Kind::non_finite, "obs has non-finite values"});
    }
    if (!all_finite(tr.next_obs)) {
        out.push_back(
            {Violation::Kind::non_finite, "next_obs has non-finite values"});
    }
    return out;
}

const char* violation_kind_name(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::dimension_mismatch: return "dimension_mismatch";
        case Violation::Kind::action_out_of_range: return "action_out_of_range";
        case Violation::Kind::non_finite: return "non_finite";
    }
    return "?";
}

}  // namespace pushrl
