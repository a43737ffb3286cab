#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pushrl/algo/learning.hpp"
#include "pushrl/algo/qnet.hpp"
#include "pushrl/comms/channel.hpp"
#include "pushrl/config/config.hpp"
#include "pushrl/envs/env.hpp"
#include "pushrl/replay/buffer.hpp"
#include "pushrl/telemetry/telemetry.hpp"

namespace pushrl::runtime {

// Why a run ended.  `none` means the run is still in progress (only ever seen
// on a partial report).
enum class StopReason {
  none,
  target_reached,
  budget_exhausted,
  time_limit,
  diverged,
  error,
};
const char* stop_reason_name(StopReason r);

struct EpisodeRecord {
  std::int64_t group = 0;
  std::int64_t index = 0;  // completion order within the group
  double episode_return = 0.0;
  std::int64_t steps = 0;
  double wall_s = 0.0;             // seconds since run start at completion
  std::uint64_t policy_version = 0;  // version of the policy that finished it
};

struct RunReport {
  std::vector<EpisodeRecord> episodes;
  std::vector<telemetry::Snapshot> series;  // aggregated across groups
  std::optional<double> final_time;  // first window-mean crossing, seconds
  std::uint64_t versions_published = 0;
  std::uint64_t total_steps = 0;    // env steps across all groups
  std::uint64_t total_updates = 0;  // learner updates across all groups
  StopReason stop_reason = StopReason::none;
  std::string error;                 // non-empty for diverged/error stops
  StalenessReport staleness;         // from group 0's buffer at shutdown
};

// State shared by the workers of one training group: the stop latch, the
// throughput counters, and the episode log.  Workers only ever touch their
// own counters plus the shared episode hub; the orchestrator reads
// everything.  The first stop request wins; later ones are ignored.
class GroupState {
 public:
  GroupState(std::int64_t group_id, std::int64_t window_capacity,
             std::int64_t start_ns);

  std::int64_t group_id() const { return group_id_; }
  std::int64_t start_ns() const { return start_ns_; }

  void request_stop(StopReason reason, const std::string& error = "");
  bool stop_requested() const { return stop_.load(std::memory_order_acquire); }
  StopReason stop_reason() const;
  std::string error() const;

  void record_episode(double episode_return, std::int64_t steps,
                      std::uint64_t policy_version);
  std::uint64_t episodes_done() const;
  double window_mean() const;
  // Appends records with index >= cursor to `out` and advances the cursor.
  void drain_episodes(std::size_t& cursor, std::vector<EpisodeRecord>& out) const;
  // Feeds the current return window into a target tracker; true on the
  // first crossing.
  bool update_target(telemetry::TargetTracker& tracker, double elapsed_s) const;

  telemetry::ThroughputCounter sample;   // env steps, written by actors
  telemetry::ThroughputCounter receive;  // transitions ingested by the buffer
  telemetry::ThroughputCounter train;    // transitions consumed by learners
  std::atomic<std::uint64_t> updates{0};
  std::atomic<std::uint64_t> versions_published{0};
  std::atomic<std::uint64_t> latest_version{0};

 private:
  std::int64_t group_id_;
  std::int64_t start_ns_;
  std::atomic<bool> stop_{false};
  mutable std::mutex mu_;
  StopReason reason_ = StopReason::none;
  std::string error_;
  telemetry::ReturnWindow window_;
  std::vector<EpisodeRecord> episodes_;
};

// ---------------------------------------------------------------------------
// Worker loops.  Each runs on its own thread, owns its arguments for the
// duration of the call, and communicates only through the passed-in channel
// endpoints.  All three return cleanly on channel closure or stop request.

struct ActorConfig {
  int actor_id = 0;
  std::int64_t rollout_length = 16;
  float epsilon = 1.0f;
  float epsilon_decay = 0.98f;
  float epsilon_min = 0.01f;
  std::uint64_t rng_seed = 1;
  std::uint64_t env_seed = 1;
  double pace_steps_per_s = 0.0;  // 0 = unpaced
  std::int64_t step_limit = 0;    // 0 = run until stop
};

// Steps the environment with epsilon-greedy actions, pushes one trajectory
// message every rollout_length transitions (a trailing partial rollout is
// flushed on exit), and swaps in newer parameters whenever the subscription
// slot holds any.  Closes `traj_out` on exit.  `control_in` (optional) is
// polled at rollout boundaries for pacing and stop commands.
void actor_loop(const ActorConfig& ac, Env& env, QNet& net, MsgSender& traj_out,
                ParamSub& params_in, MsgReceiver* control_in, GroupState& state);

struct LearnerConfig {
  int learner_id = 0;
  DqnHyper hyper;
  std::int64_t batch_size = 32;
  std::int64_t target_update_interval = 100;
  std::int64_t publish_interval = 1;
  std::int64_t max_outstanding = 2;  // batch-request credits in flight
  double max_updates_per_s = 0.0;    // 0 = unpaced
  std::int64_t update_limit = 0;     // 0 = run until stop
};

// Keeps up to max_outstanding batch requests posted to the buffer, runs one
// optimizer update per received batch, syncs the target network every
// target_update_interval updates, and publishes parameters to every
// subscription in `params_out` every publish_interval updates.  Closes
// `request_out` on exit.  A non-finite loss stops the whole group.
void learner_loop(const LearnerConfig& lc, QNet& net, QNet& target,
                  AdamState& opt, MsgSender& request_out, MsgReceiver& batch_in,
                  const std::vector<ParamSub*>& params_out,
                  MsgReceiver* control_in, GroupState& state);

struct BufferConfig {
  std::int64_t batch_size = 32;
  std::int64_t fresh_per_batch = 1;  // 0 = serve regardless of fresh data
  int n_learners = 1;
  std::uint64_t rng_seed = 1;
  std::int64_t drain_limit = 64;  // max trajectory messages per iteration
};

// Alternates between draining trajectories into the replay buffer and
// serving batch requests, with bounded work per iteration so neither side
// starves.  Requests arriving before warmup get an insufficient-warmup
// reply; requests arriving before fresh_per_batch new samples are held.
// Exits when `traj_in` closes and everything is drained, then closes all
// batch senders.
void buffer_loop(const BufferConfig& bc, ReplayBuffer& buf, MsgReceiver& traj_in,
                 MsgReceiver& request_in,
                 const std::vector<MsgSender*>& batch_out, GroupState& state);

// ---------------------------------------------------------------------------
// Orchestration.  Spawns the configured topology (or runs the single-thread
// reference loop in serial mode), monitors stop conditions, and emits
// episode/throughput rows to `logger` when it is enabled.  Worker panics
// abort the run with a partial report rather than throwing.
RunReport run_training(const config::RunConfig& cfg,
                       telemetry::MetricsLogger* logger = nullptr);

}  // namespace pushrl::runtime
