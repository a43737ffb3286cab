#include "pushrl/strategy/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pushrl::strategy {

double predicted_actor_rate(const ThroughputProfile& p, std::int64_t n_actors,
                            std::int64_t m_a) {
  return p.tr_a1 * static_cast<double>(std::min(n_actors, m_a));
}

double predicted_learner_rate(const ThroughputProfile& p, std::int64_t n_learners,
                              std::int64_t m_l) {
  double cores_per_learner =
      static_cast<double>(m_l) / static_cast<double>(n_learners);
  return static_cast<double>(n_learners) * p.tr_l1 *
         std::min(cores_per_learner, p.l_sat_cores);
}

AllocationPlan plan(const ThroughputProfile& p, std::int64_t total_cores,
                    const config::TrainingConfig& training) {
  if (total_cores < 2) {
    throw std::invalid_argument(
        "plan: need at least 2 cores (one actor, one learner)");
  }
  if (!(p.tr_a1 > 0.0) || !(p.tr_l1 > 0.0) || !(p.l_sat_cores > 0.0)) {
    throw std::invalid_argument("plan: profile throughputs must be positive");
  }

  bool found = false;
  AllocationPlan best;
  double best_min = -1.0;
  double best_gap = 0.0;
  std::int64_t best_workers = 0;

  for (std::int64_t m_l = 1; m_l < total_cores; ++m_l) {
    std::int64_t m_a = total_cores - m_l;
    for (std::int64_t n_l = 1; n_l <= m_l; ++n_l) {
      for (std::int64_t n_a = 1; n_a <= m_a; ++n_a) {
        double tra = predicted_actor_rate(p, n_a, m_a);
        double trl = predicted_learner_rate(p, n_l, m_l);
        double lo = std::min(tra, trl);
        double gap = std::abs(tra - trl);
        std::int64_t workers = n_a + n_l;
        bool better = false;
        if (lo > best_min) {
          better = true;
        } else if (lo == best_min) {
          if (gap < best_gap) {
            better = true;
          } else if (gap == best_gap) {
            if (workers < best_workers) {
              better = true;
            } else if (workers == best_workers && n_l < best.n_learners) {
              better = true;
            }
          }
        }
        if (better) {
          found = true;
          best_min = lo;
          best_gap = gap;
          best_workers = workers;
          best.n_learners = n_l;
          best.n_actors = n_a;
          best.m_l = m_l;
          best.m_a = m_a;
          best.predicted_tr_a = tra;
          best.predicted_tr_l = trl;
        }
      }
    }
  }
  if (!found) {
    throw std::invalid_argument("plan: no feasible allocation");
  }

  // Size the buffer so the planned consumption rate over the new capacity
  // matches the staleness ratio the serial configuration would have had:
  // capacity' = consumption / (batch / capacity), bounded to keep memory
  // sane, then restate the ratio exactly against the rounded capacity.
  double serial_p = static_cast<double>(training.batch_size) /
                    static_cast<double>(training.buffer_capacity);
  double raw = best.predicted_tr_l / serial_p;
  std::int64_t capped = static_cast<std::int64_t>(std::llround(raw));
  capped = std::clamp<std::int64_t>(capped, training.batch_size,
                                    std::int64_t{1} << 20);
  best.adjusted_capacity = capped;
  best.target_p = static_cast<double>(training.batch_size) /
                  static_cast<double>(best.adjusted_capacity);
  return best;
}

std::string plan_to_config_text(const AllocationPlan& plan,
                                const config::RunConfig& base) {
  config::RunConfig out = base;
  out.distribution.mode = config::Mode::distributed;
  out.distribution.n_actors = plan.n_actors;
  out.distribution.n_learners = plan.n_learners;
  out.distribution.cores = plan.m_l + plan.m_a;
  out.training.buffer_capacity = plan.adjusted_capacity;
  if (out.training.warmup_size > out.training.buffer_capacity) {
    out.training.warmup_size = out.training.buffer_capacity;
  }

  const char* bottleneck = "balanced";
  if (plan.predicted_tr_a < plan.predicted_tr_l) {
    bottleneck = "actor-bound";
  } else if (plan.predicted_tr_l < plan.predicted_tr_a) {
    bottleneck = "learner-bound";
  }

  std::ostringstream os;
  os << "# allocation plan\n";
  os << "# cores: " << plan.m_a << " actor + " << plan.m_l << " learner\n";
  os << "# predicted_tr_a = " << plan.predicted_tr_a << " steps/s\n";
  os << "# predicted_tr_l = " << plan.predicted_tr_l << " samples/s\n";
  os << "# bottleneck = " << bottleneck << "\n";
  os << "# target_p = " << plan.target_p << "\n";
  os << "\n";
  os << config::serialize(out);
  return os.str();
}

}  // namespace pushrl::strategy
