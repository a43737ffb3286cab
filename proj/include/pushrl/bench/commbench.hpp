#pragma once
// Virtual communication benchmark: N senders each simulate per-sample
// production with a fixed sleep and push one fixed-size message per sample to
// a single probing receiver; the run stops once a target number of samples
// has been received.  Each run reports the measured collection time next to
// the analytic critical-path prediction, so the model can be checked against
// the live transport.  Senders and transport come from [distribution]; the
// benchmark knobs come from [commbench].

#include <cstdint>
#include <string>
#include <vector>

#include "pushrl/config/config.hpp"
#include "pushrl/strategy/strategy.hpp"

namespace pushrl::bench {

// One measured point of the benchmark.
struct CommbenchResult {
  // Echo of the inputs.
  std::int64_t n_actors = 0;
  std::int64_t message_bytes = 0;
  std::int64_t n_samples = 0;
  std::int64_t queue_depth = 0;
  config::Transport transport = config::Transport::inproc;
  double sample_time_s = 0.0;   // configured t_sp
  double receive_time_s = 0.0;  // configured extra per-message service

  // Measurements.
  double measured_t_sd = 0.0;  // mean seconds/message inside send()
  double measured_t_rv = 0.0;  // mean receive service seconds/message
                               // (transport busy time + configured service)
  double collect_time_s = 0.0;      // wall seconds to the n_samples-th sample
  double receive_rate = 0.0;        // samples/s over the run
  double throughput_mb_s = 0.0;     // payload MB/s over the run
  std::uint64_t sent_total = 0;     // all messages senders pushed
  std::uint64_t received_total = 0; // all messages drained (>= n_samples)

  // Model prediction from this point's own measured costs.
  double predicted_s = 0.0;
  strategy::Bottleneck predicted_bottleneck = strategy::Bottleneck::actor_bound;
};

// Runs one benchmark point as configured. Throws config::ConfigError on an
// invalid config and std::runtime_error if the transport fails mid-run.
CommbenchResult run_commbench(const config::RunConfig& cfg);

// Re-predicts a sweep of points that share sample time and message size but
// vary n_actors, pooling the per-point cost measurements: the send cost is
// the minimum of the per-point means (backpressure only ever inflates it)
// and the receive cost is the maximum (service under load is the regime
// where it binds).  `first_receiver_bound_n` is the smallest actor count the
// pooled model predicts to be receiver-bound, i.e. the plateau onset.
struct SweepPrediction {
  double t_sp = 0.0;
  double t_sd = 0.0;
  double t_rv = 0.0;
  double switch_ratio = 0.0;  // (t_sp + t_sd) / t_rv, the branch-switch point
  std::int64_t first_receiver_bound_n = 0;
  std::vector<double> predicted_s;  // parallel to the input points
};
SweepPrediction predict_from_sweep(const std::vector<CommbenchResult>& points);

// Human-readable block for one result, measured and predicted side by side.
std::string format_result(const CommbenchResult& r);

}  // namespace pushrl::bench
