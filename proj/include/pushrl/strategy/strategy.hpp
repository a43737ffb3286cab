#pragma once
// Distribution strategy: the analytic collect-time model, throughput
// profiling of the three pipeline stages, the allocation planner that splits
// cores between actors and learners, and the pacing controller that keeps the
// realized production/consumption balance near the planned one.

#include <cstdint>
#include <string>

#include "pushrl/algo/qnet.hpp"
#include "pushrl/comms/channel.hpp"
#include "pushrl/config/config.hpp"
#include "pushrl/envs/env.hpp"

namespace pushrl::strategy {

// Which stage limits collection throughput.
enum class Bottleneck : int { actor_bound = 0, receiver_bound = 1 };
const char* bottleneck_name(Bottleneck b);

// Two readings of the collect-time model. `amortized` spreads the per-sample
// production+send cost across the senders (consistent with the branch
// condition and with observed multi-sender scaling); `literal` charges the
// full production+send cost regardless of sender count. They agree for a
// single sender.
enum class CollectModel : int { amortized = 0, literal = 1 };

struct CollectTime {
  double seconds = 0.0;
  Bottleneck bottleneck = Bottleneck::actor_bound;
};

// Predicted time to collect n_collect samples given per-sample production
// time t_sp, per-message send time t_sd, per-message receive time t_rv, and
// n_actors concurrent senders. All times in seconds. Throws
// std::invalid_argument on non-positive inputs.
CollectTime collect_time(double t_sp, double t_sd, double t_rv,
                         std::int64_t n_actors, std::int64_t n_collect,
                         CollectModel model = CollectModel::amortized);

// Measured single-unit throughputs, the inputs to the planner.
//
// Units: tr_a1 is env steps/s produced by one actor on one core; tr_l1 is
// samples/s consumed by one learner per core in the linear regime, saturating
// at l_sat_cores cores per learner; t_sp/t_sd/t_rv are seconds per sample or
// per message as in collect_time.
struct ThroughputProfile {
  double tr_a1 = 0.0;
  double tr_l1 = 0.0;
  double l_sat_cores = 1.0;
  double t_sp = 0.0;
  double t_sd = 0.0;
  double t_rv = 0.0;
  std::string measured_on;

  bool operator==(const ThroughputProfile&) const = default;
};

// Chosen worker counts and core split, with the throughputs the model
// predicts for them and the staleness-preserving buffer size.
struct AllocationPlan {
  std::int64_t n_learners = 1;
  std::int64_t n_actors = 1;
  std::int64_t m_l = 1;  // cores assigned to learners
  std::int64_t m_a = 1;  // cores assigned to actors
  double predicted_tr_a = 0.0;  // samples/s produced
  double predicted_tr_l = 0.0;  // samples/s consumed
  double target_p = 0.0;        // batch_size / adjusted_capacity, exact
  std::int64_t adjusted_capacity = 0;
};

// Model throughputs for a candidate allocation: actors need one core each
// (extra cores idle), learners scale linearly with cores per learner up to
// the measured saturation point.
double predicted_actor_rate(const ThroughputProfile& p, std::int64_t n_actors,
                            std::int64_t m_a);
double predicted_learner_rate(const ThroughputProfile& p, std::int64_t n_learners,
                              std::int64_t m_l);

// Exhaustive search over (n_learners, n_actors, core split) with
// m_l + m_a = total_cores, maximizing min(TR_L, TR_A); ties broken by smaller
// |TR_L - TR_A|, then fewer workers, then fewer learners. The training config
// supplies batch size and serial buffer capacity for the staleness target.
// Throws std::invalid_argument when total_cores < 2.
AllocationPlan plan(const ThroughputProfile& p, std::int64_t total_cores,
                    const config::TrainingConfig& training);

// Profile document (de)serialization, same text format as configs, one
// [profile] section.
std::string serialize_profile(const ThroughputProfile& p);
ThroughputProfile parse_profile_text(const std::string& text,
                                     const std::string& origin = "<profile>");
ThroughputProfile parse_profile(const std::string& path);

// Renders a plan as a runnable config: the base config with worker counts,
// cores, and buffer capacity replaced, prefixed by a comment block holding
// the predictions.
std::string plan_to_config_text(const AllocationPlan& plan,
                                const config::RunConfig& base);

// Measures tr_a1/t_sp (actor micro-run), tr_l1 (synthetic-batch learner
// micro-run), and t_sd/t_rv (transport echo) for the given config. Runs for
// roughly `duration_s` total; throws std::runtime_error when that is too
// short to gather 20 timing samples per stage.
ThroughputProfile measure_profile(const config::RunConfig& cfg, double duration_s);

// One measured pipeline stage: median chunk rate and its reciprocal.
struct StageTiming {
  double rate = 0.0;      // events per second (median over chunks)
  double per_event = 0.0; // seconds per event (1 / rate)
  int chunks = 0;
};

// Building blocks of measure_profile, exposed so tests can inject synthetic
// environments and transports. Each times fixed-size work chunks for about
// `duration_s` and reports the median chunk rate; fewer than `min_chunks`
// completed chunks raises std::runtime_error (the duration was too short).
StageTiming measure_actor_stage(Env& env, const QNet& net, float epsilon,
                                double duration_s, int steps_per_chunk = 200,
                                int min_chunks = 20);
StageTiming measure_learner_stage(const config::RunConfig& cfg, double duration_s,
                                  int updates_per_chunk = 5, int min_chunks = 20);

struct TransportTiming {
  double t_sd = 0.0;  // median seconds per send
  double t_rv = 0.0;  // mean probe time per received message under load
};

// Streams n_messages copies of `msg` from a sender thread while the calling
// thread drains the receiver; requires n_messages >= min_samples.
TransportTiming measure_transport_stage(MsgSender& tx, MsgReceiver& rx,
                                        const Envelope& msg, int n_messages,
                                        int min_samples = 20);

// What the pacing controller tells the orchestrator to do after a window.
enum class PacingAction : int { none = 0, pace_actors = 1, pace_learner = 2 };
const char* pacing_action_name(PacingAction a);

struct PacingDirective {
  PacingAction action = PacingAction::none;
  // Recommended per-actor production rate (steps/s) when action==pace_actors.
  double actor_steps_per_s = 0.0;
  // Recommended whole-run update cap (updates/s) when action==pace_learner.
  double learner_updates_per_s = 0.0;
};

// Watches the realized production/consumption balance R = produced/consumed
// per window and compares it against the planned balance R*. Outside a
// multiplicative band (default 2x) it recommends pacing the overactive side
// back toward balance. Advisory only: callers apply directives at loop
// boundaries.
class StalenessController {
 public:
  StalenessController(double target_ratio, std::int64_t n_actors,
                      std::int64_t batch_size, double band = 2.0);

  // Feed one window of counters (events per second). Zero consumption yields
  // a no-op directive: before warmup there is nothing to balance against.
  PacingDirective evaluate(double produced_per_s, double consumed_per_s) const;

  double target_ratio() const { return target_ratio_; }

 private:
  double target_ratio_;
  std::int64_t n_actors_;
  std::int64_t batch_size_;
  double band_;
};

}  // namespace pushrl::strategy
