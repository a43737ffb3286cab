#include "pushrl/runtime/runtime.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <thread>
#include <utility>

#include "pushrl/comms/envelope.hpp"
#include "pushrl/util/time.hpp"

namespace pushrl::runtime {

namespace {

// Sleeps until `deadline_ns` in short slices so a stop request is never more
// than one slice away.
void paced_wait(std::int64_t deadline_ns, const GroupState& state) {
  constexpr std::int64_t kSliceNs = 20'000'000;  // 20 ms
  for (;;) {
    if (state.stop_requested()) return;
    std::int64_t remaining = deadline_ns - now_ns();
    if (remaining <= 0) return;
    std::this_thread::sleep_for(
        std::chrono::nanoseconds(std::min(remaining, kSliceNs)));
  }
}

void idle_nap() {
  std::this_thread::sleep_for(std::chrono::microseconds(50));
}

}  // namespace

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::target_reached: return "target_reached";
    case StopReason::budget_exhausted: return "budget_exhausted";
    case StopReason::time_limit: return "time_limit";
    case StopReason::diverged: return "diverged";
    case StopReason::error: return "error";
  }
  return "unknown";
}

GroupState::GroupState(std::int64_t group_id, std::int64_t window_capacity,
                       std::int64_t start_ns)
    : group_id_(group_id), start_ns_(start_ns), window_(window_capacity) {}

void GroupState::request_stop(StopReason reason, const std::string& error) {
  std::lock_guard<std::mutex> lock(mu_);
  if (reason_ == StopReason::none) {
    reason_ = reason;
    error_ = error;
  }
  stop_.store(true, std::memory_order_release);
}

StopReason GroupState::stop_reason() const {
  std::lock_guard<std::mutex> lock(mu_);
  return reason_;
}

std::string GroupState::error() const {
  std::lock_guard<std::mutex> lock(mu_);
  return error_;
}

void GroupState::record_episode(double episode_return, std::int64_t steps,
                                std::uint64_t policy_version) {
  std::lock_guard<std::mutex> lock(mu_);
  EpisodeRecord rec;
  rec.group = group_id_;
  rec.index = static_cast<std::int64_t>(episodes_.size());
  rec.episode_return = episode_return;
  rec.steps = steps;
  rec.wall_s = static_cast<double>(now_ns() - start_ns_) * 1e-9;
  rec.policy_version = policy_version;
  window_.record(episode_return);
  episodes_.push_back(std::move(rec));
}

std::uint64_t GroupState::episodes_done() const {
  std::lock_guard<std::mutex> lock(mu_);
  return episodes_.size();
}

double GroupState::window_mean() const {
  std::lock_guard<std::mutex> lock(mu_);
  return window_.size() == 0 ? 0.0 : window_.mean();
}

void GroupState::drain_episodes(std::size_t& cursor,
                                std::vector<EpisodeRecord>& out) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (; cursor < episodes_.size(); ++cursor) {
    out.push_back(episodes_[cursor]);
  }
}

bool GroupState::update_target(telemetry::TargetTracker& tracker,
                               double elapsed_s) const {
  std::lock_guard<std::mutex> lock(mu_);
  return tracker.update(window_, elapsed_s);
}

// ---------------------------------------------------------------------------

void actor_loop(const ActorConfig& ac, Env& env, QNet& net, MsgSender& traj_out,
                ParamSub& params_in, MsgReceiver* control_in,
                GroupState& state) {
  Rng rng(ac.rng_seed);
  QNet::Workspace ws;
  float epsilon = ac.epsilon;
  double pace = ac.pace_steps_per_s;
  std::int64_t next_step_ns = now_ns();
  // Start at zero so parameters published before this actor spun up are
  // adopted on the very first poll.
  std::uint64_t last_published = 0;

  std::vector<Transition> rollout;
  rollout.reserve(static_cast<std::size_t>(ac.rollout_length));
  std::vector<float> obs = env.reset(ac.env_seed);
  double ep_return = 0.0;
  std::int64_t ep_steps = 0;
  std::int64_t steps = 0;
  bool stop_seen = false;

  // On swap the local policy may have acted with a mix of versions inside
  // one rollout; each transition carries its own stamp, the envelope carries
  // the version current at send time.
  auto flush = [&] {
    if (!rollout.empty()) {
      traj_out.send(make_trajectory_msg(static_cast<std::uint64_t>(ac.actor_id),
                                        net.version(), rollout));
      rollout.clear();
    }
  };

  try {
    while (!stop_seen && !state.stop_requested() &&
           (ac.step_limit == 0 || steps < ac.step_limit)) {
      // Newest-wins parameter poll: one atomic read per step, a full load
      // only when the slot has seen a publish since last time.
      std::uint64_t published = params_in.published_count();
      if (published != last_published) {
        last_published = published;
        if (auto ps = params_in.latest(); ps && ps->version > net.version()) {
          net.load_params(ps->data);
          net.set_version(ps->version);
        }
      }

      if (pace > 0.0) {
        next_step_ns += static_cast<std::int64_t>(1e9 / pace);
        std::int64_t now = now_ns();
        if (next_step_ns > now) {
          paced_wait(next_step_ns, state);
          if (state.stop_requested()) break;
        } else if (now - next_step_ns > 1'000'000'000) {
          next_step_ns = now;  // fell behind by over a second; drop backlog
        }
      }

      net.forward(obs.data(), ws);
      int action = epsilon_greedy(ws.q, epsilon, rng);
      StepResult r = env.step(action);

      Transition tr;
      tr.obs = std::move(obs);
      tr.action = action;
      tr.reward = r.reward;
      tr.next_obs = r.obs;
      tr.done = r.done && !r.truncated;
      tr.truncated = r.truncated;
      tr.policy_version = net.version();
      tr.produced_at_ns = now_ns();
      rollout.push_back(std::move(tr));

      state.sample.add(1);
      ++steps;
      ep_return += r.reward;
      ++ep_steps;

      if (static_cast<std::int64_t>(rollout.size()) >= ac.rollout_length) {
        flush();
      }

      if (r.done) {
        state.record_episode(ep_return, ep_steps, net.version());
        ep_return = 0.0;
        ep_steps = 0;
        epsilon = std::max(ac.epsilon_min, epsilon * ac.epsilon_decay);
        obs = env.reset();
      } else {
        obs = std::move(r.obs);
      }

      if (control_in != nullptr && steps % ac.rollout_length == 0) {
        Envelope e;
        while (control_in->probe(e) == ProbeStatus::message) {
          if (e.kind != MsgKind::control) continue;
          std::uint64_t arg = 0;
          ControlCode code = control_from_payload(e.payload, &arg);
          if (code == ControlCode::stop) {
            stop_seen = true;
            break;
          }
          if (code == ControlCode::pace_actor) {
            pace = static_cast<double>(arg);
            next_step_ns = now_ns();
          }
        }
      }
    }
    flush();
  } catch (const ChannelClosedError&) {
    // Receiver went away: shutdown is already underway.
  }
  traj_out.close();
}

// ---------------------------------------------------------------------------

void learner_loop(const LearnerConfig& lc, QNet& net, QNet& target,
                  AdamState& opt, MsgSender& request_out, MsgReceiver& batch_in,
                  const std::vector<ParamSub*>& params_out,
                  MsgReceiver* control_in, GroupState& state) {
  QNet::Workspace ws;
  std::vector<float> grad(net.param_count(), 0.0f);
  std::int64_t credits = 0;
  std::int64_t updates = 0;
  double pace = lc.max_updates_per_s;
  std::int64_t next_update_ns = now_ns();
  bool stop_seen = false;

  auto publish = [&] {
    ParamSet ps;
    ps.version = net.version();
    ps.data = net.params();
    for (ParamSub* sub : params_out) {
      sub->publish(ps);
    }
    state.versions_published.fetch_add(1, std::memory_order_relaxed);
    std::uint64_t seen = state.latest_version.load(std::memory_order_relaxed);
    while (seen < ps.version &&
           !state.latest_version.compare_exchange_weak(
               seen, ps.version, std::memory_order_relaxed)) {
    }
  };

  try {
    while (!stop_seen && !state.stop_requested() &&
           (lc.update_limit == 0 || updates < lc.update_limit)) {
      while (credits < lc.max_outstanding) {
        request_out.send(make_control_msg(static_cast<std::uint64_t>(lc.learner_id),
                                          ControlCode::batch_request));
        ++credits;
      }

      if (control_in != nullptr) {
        Envelope c;
        while (control_in->probe(c) == ProbeStatus::message) {
          if (c.kind != MsgKind::control) continue;
          std::uint64_t arg = 0;
          ControlCode code = control_from_payload(c.payload, &arg);
          if (code == ControlCode::stop) {
            stop_seen = true;
            break;
          }
          if (code == ControlCode::pace_learner) {
            pace = static_cast<double>(arg);
            next_update_ns = now_ns();
          }
        }
        if (stop_seen) break;
      }

      Envelope e;
      ProbeStatus st = batch_in.probe(e);
      if (st == ProbeStatus::closed) break;
      if (st == ProbeStatus::empty) {
        idle_nap();
        continue;
      }

      if (e.kind == MsgKind::control) {
        std::uint64_t arg = 0;
        if (control_from_payload(e.payload, &arg) ==
            ControlCode::insufficient_warmup) {
          --credits;  // credit consumed; back off before asking again
          std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
        continue;
      }
      if (e.kind != MsgKind::trajectory) continue;

      --credits;
      std::vector<Transition> batch = transitions_from_payload(e.payload);
      if (batch.empty()) continue;

      if (pace > 0.0) {
        next_update_ns += static_cast<std::int64_t>(1e9 / pace);
        std::int64_t now = now_ns();
        if (next_update_ns > now) {
          paced_wait(next_update_ns, state);
          if (state.stop_requested()) break;
        } else if (now - next_update_ns > 1'000'000'000) {
          next_update_ns = now;
        }
      }

      try {
        dqn_update(net, target, batch, opt, lc.hyper, ws, grad);
      } catch (const std::runtime_error& ex) {
        state.request_stop(StopReason::diverged, ex.what());
        break;
      }
      ++updates;
      state.updates.fetch_add(1, std::memory_order_relaxed);
      state.train.add(batch.size());

      if (lc.target_update_interval > 0 &&
          updates % lc.target_update_interval == 0) {
        sync_target(net, target);
      }
      if (lc.publish_interval > 0 && updates % lc.publish_interval == 0) {
        publish();
      }
    }
  } catch (const ChannelClosedError&) {
  }
  request_out.close();
}

// ---------------------------------------------------------------------------

void buffer_loop(const BufferConfig& bc, ReplayBuffer& buf, MsgReceiver& traj_in,
                 MsgReceiver& request_in,
                 const std::vector<MsgSender*>& batch_out, GroupState& state) {
  Rng rng(bc.rng_seed);
  const std::size_t n_learners = batch_out.size();
  std::vector<std::int64_t> pending(n_learners, 0);
  std::vector<std::int64_t> fresh(n_learners, 0);
  bool traj_closed = false;
  bool req_closed = false;

  auto drain_trajectories = [&]() -> int {
    int got = 0;
    Envelope e;
    while (!traj_closed && got < bc.drain_limit) {
      ProbeStatus st = traj_in.probe(e);
      if (st == ProbeStatus::closed) {
        traj_closed = true;
        break;
      }
      if (st == ProbeStatus::empty) break;
      ++got;
      if (e.kind != MsgKind::trajectory) continue;
      std::vector<Transition> trs = transitions_from_payload(e.payload);
      if (trs.empty()) continue;
      buf.push(trs);
      state.receive.add(trs.size());
      for (auto& f : fresh) {
        f += static_cast<std::int64_t>(trs.size());
      }
    }
    return got;
  };

  auto drain_requests = [&]() -> int {
    int got = 0;
    Envelope e;
    while (!req_closed && got < bc.drain_limit) {
      ProbeStatus st = request_in.probe(e);
      if (st == ProbeStatus::closed) {
        req_closed = true;
        break;
      }
      if (st == ProbeStatus::empty) break;
      ++got;
      if (e.kind != MsgKind::control) continue;
      std::uint64_t arg = 0;
      if (control_from_payload(e.payload, &arg) != ControlCode::batch_request) {
        continue;
      }
      if (e.sender_id < n_learners) {
        ++pending[e.sender_id];
      }
    }
    return got;
  };

  auto serve = [&]() -> int {
    int served = 0;
    for (std::size_t l = 0; l < n_learners; ++l) {
      while (pending[l] > 0) {
        if (buf.size() < buf.warmup_size()) {
          batch_out[l]->send(
              make_control_msg(0, ControlCode::insufficient_warmup,
                               static_cast<std::uint64_t>(buf.size())));
          --pending[l];
          ++served;
          continue;
        }
        if (bc.fresh_per_batch > 0 && fresh[l] < bc.fresh_per_batch) {
          break;  // hold the credit until enough new data lands
        }
        auto batch = buf.sample(bc.batch_size, rng);
        if (!batch) break;
        batch_out[l]->send(make_trajectory_msg(
            0, state.latest_version.load(std::memory_order_relaxed), *batch,
            TrajKind::batch));
        if (bc.fresh_per_batch > 0) {
          fresh[l] -= bc.fresh_per_batch;
        }
        --pending[l];
        ++served;
      }
    }
    return served;
  };

  try {
    while (!traj_closed) {
      int work = drain_trajectories();
      work += drain_requests();
      if (!state.stop_requested()) {
        work += serve();
      }
      if (work == 0) {
        idle_nap();
      }
    }
  } catch (const ChannelClosedError&) {
  }
  for (MsgSender* out : batch_out) {
    out->close();
  }
}

}  // namespace pushrl::runtime
