#include "pushrl/strategy/strategy.hpp"

#include <algorithm>
#include <stdexcept>

namespace pushrl::strategy {

const char* bottleneck_name(Bottleneck b) {
  return b == Bottleneck::actor_bound ? "actor-bound" : "receiver-bound";
}

CollectTime collect_time(double t_sp, double t_sd, double t_rv,
                         std::int64_t n_actors, std::int64_t n_collect,
                         CollectModel model) {
  if (!(t_sp > 0.0) || !(t_sd > 0.0) || !(t_rv > 0.0)) {
    throw std::invalid_argument("collect_time: stage times must be positive");
  }
  if (n_actors < 1 || n_collect < 1) {
    throw std::invalid_argument("collect_time: counts must be >= 1");
  }
  double send_side = (t_sp + t_sd) / static_cast<double>(n_actors);
  CollectTime out;
  if (send_side > t_rv) {
    out.bottleneck = Bottleneck::actor_bound;
    double per_sample = model == CollectModel::amortized ? send_side : t_sp + t_sd;
    out.seconds = per_sample * static_cast<double>(n_collect);
  } else {
    out.bottleneck = Bottleneck::receiver_bound;
    out.seconds = t_rv * static_cast<double>(n_collect);
  }
  return out;
}

}  // namespace pushrl::strategy
