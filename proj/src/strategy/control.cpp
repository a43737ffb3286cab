#include "pushrl/strategy/strategy.hpp"

#include <algorithm>
#include <stdexcept>

namespace pushrl::strategy {

const char* pacing_action_name(PacingAction a) {
  switch (a) {
    case PacingAction::none:
      return "none";
    case PacingAction::pace_actors:
      return "pace_actors";
    case PacingAction::pace_learner:
      return "pace_learner";
  }
  return "unknown";
}

StalenessController::StalenessController(double target_ratio, std::int64_t n_actors,
                                         std::int64_t batch_size, double band)
    : target_ratio_(target_ratio),
      n_actors_(n_actors),
      batch_size_(batch_size),
      band_(band) {
  if (!(target_ratio_ > 0.0)) {
    throw std::invalid_argument("StalenessController: target ratio must be > 0");
  }
  if (!(band_ > 1.0)) {
    throw std::invalid_argument("StalenessController: band must be > 1");
  }
  if (n_actors_ < 1 || batch_size_ < 1) {
    throw std::invalid_argument("StalenessController: counts must be >= 1");
  }
}

PacingDirective StalenessController::evaluate(double produced_per_s,
                                              double consumed_per_s) const {
  PacingDirective d;
  if (consumed_per_s <= 0.0) {
    // Nothing consumed yet (warmup, or an idle window): no basis for pacing.
    return d;
  }
  double ratio = produced_per_s / consumed_per_s;
  if (ratio > band_ * target_ratio_) {
    // Overproduction: slow every actor to the rate consumption can absorb.
    d.action = PacingAction::pace_actors;
    d.actor_steps_per_s =
        consumed_per_s * target_ratio_ / static_cast<double>(n_actors_);
  } else if (ratio < target_ratio_ / band_) {
    // Overconsumption (or stalled production): cap the learner's update
    // cadence near what production sustains. Floored at a trickle so a
    // transient stall can never park the learner permanently.
    d.action = PacingAction::pace_learner;
    d.learner_updates_per_s =
        std::max(produced_per_s / target_ratio_ / static_cast<double>(batch_size_),
                 1.0);
  }
  return d;
}

}  // namespace pushrl::strategy
