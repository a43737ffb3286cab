#include "cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace pushrl {

namespace {

constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfPoleLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfPoleLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaThreshold = 12.0 * 2.0 * M_PI / 360.0;
constexpr double kXThreshold = 2.4;

}  // namespace

CartPoleEnv::CartPoleEnv(uint64_t seed, int max_steps) : rng_(seed) {
    spec_ = {"cartpole", 4, 2, max_steps > 0 ? max_steps : 200};
}

std::vector<float> CartPoleEnv::reset(uint64_t seed) {
    rng_.reseed(seed);
    return reset();
}

std::vector<float> CartPoleEnv::reset() {
    x_ = rng_.uniform_f32(-0.05f, 0.05f);
    x_dot_ = rng_.uniform_f32(-0.05f, 0.05f);
    theta_ = rng_.uniform_f32(-0.05f, 0.05f);
    theta_dot_ = rng_.uniform_f32(-0.05f, 0.05f);
    steps_ = 0;
    finished_ = false;
    return observe();
}

StepResult CartPoleEnv::step(int action) {
    if (action < 0 || action >= spec_.n_actions) {
        throw std::invalid_argument("cartpole: action out of range: " +
                                    std::to_string(action));
    }
    if (finished_) {
        throw std::logic_error("cartpole: step() after episode end");
    }

    const double force = action == 1 ? kForceMag : -kForceMag;
    const double cos_theta = std::cos(theta_);
    const double sin_theta = std::sin(theta_);
    const double temp =
        (force + kPoleMassLength * theta_dot_ * theta_dot_ * sin_theta) /
        kTotalMass;
    const double theta_acc =
        (kGravity * sin_theta - cos_theta * temp) /
        (kHalfPoleLength *
         (4.0 / 3.0 - kMassPole * cos_theta * cos_theta / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_theta / kTotalMass;

    // Semi-explicit Euler: positions advance with the old velocities.
    x_ += kTau * x_dot_;
    x_dot_ += kTau * x_acc;
    theta_ += kTau * theta_dot_;
    theta_dot_ += kTau * theta_acc;
    ++steps_;

    StepResult result;
    result.obs = observe();
    result.reward = 1.0f;
    const bool failed =
        x_ < -kXThreshold || x_ > kXThreshold || theta_ < -kThetaThreshold ||
        theta_ > kThetaThreshold;
    result.truncated = !failed && steps_ >= spec_.max_steps;
    result.done = failed || result.truncated;
    finished_ = result.done;
    return result;
}

std::vector<float> CartPoleEnv::observe() const {
    return {static_cast<float>(x_), static_cast<float>(x_dot_),
            static_cast<float>(theta_), static_cast<float>(theta_dot_)};
}

}  // namespace pushrl
