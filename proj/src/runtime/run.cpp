#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pushrl/comms/envelope.hpp"
#include "pushrl/runtime/runtime.hpp"
#include "pushrl/strategy/strategy.hpp"
#include "pushrl/util/time.hpp"

namespace pushrl::runtime {

namespace {

QNetConfig net_config_for(const EnvSpec& spec, const config::ModelConfig& m) {
  QNetConfig qc;
  qc.obs_dim = spec.obs_dim;
  qc.n_actions = spec.n_actions;
  qc.hidden = static_cast<int>(m.hidden);
  return qc;
}

DqnHyper hyper_for(const config::TrainingConfig& t) {
  DqnHyper hp;
  hp.gamma = static_cast<float>(t.gamma);
  hp.lr = static_cast<float>(t.learning_rate);
  return hp;
}

// Mixes a group/worker index into the base seed so every worker gets a
// distinct, reproducible stream.
std::uint64_t mix_seed(std::int64_t base, std::int64_t group,
                       std::int64_t worker) {
  std::uint64_t x =
      static_cast<std::uint64_t>(base) +
      0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(group * 64 + worker + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return x;
}

struct SeriesTrackers {
  telemetry::RateTracker sample, receive, train;
};

telemetry::Snapshot aggregate_snapshot(
    double elapsed_s, const std::vector<std::unique_ptr<GroupState>>& states,
    SeriesTrackers& rates) {
  telemetry::Snapshot s;
  s.t_s = elapsed_s;
  double best_window = 0.0;
  for (const auto& st : states) {
    s.sample_count += st->sample.count();
    s.receive_count += st->receive.count();
    s.train_count += st->train.count();
    s.episodes += st->episodes_done();
    s.versions_published +=
        st->versions_published.load(std::memory_order_relaxed);
    best_window = std::max(best_window, st->window_mean());
  }
  s.window_mean = best_window;
  const std::int64_t t_ns = now_ns();
  s.sample_rate = rates.sample.observe(t_ns, s.sample_count);
  s.receive_rate = rates.receive.observe(t_ns, s.receive_count);
  s.train_rate = rates.train.observe(t_ns, s.train_count);
  return s;
}

void drain_episodes_to(const std::vector<std::unique_ptr<GroupState>>& states,
                       std::vector<std::size_t>& cursors, RunReport& rep,
                       telemetry::MetricsLogger* logger) {
  for (std::size_t g = 0; g < states.size(); ++g) {
    std::size_t before = rep.episodes.size();
    states[g]->drain_episodes(cursors[g], rep.episodes);
    if (logger != nullptr && logger->enabled()) {
      for (std::size_t i = before; i < rep.episodes.size(); ++i) {
        const EpisodeRecord& e = rep.episodes[i];
        logger->write_episode(static_cast<std::uint64_t>(e.index),
                              e.episode_return,
                              static_cast<std::uint64_t>(e.steps), e.wall_s,
                              e.policy_version, e.group);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Serial reference: actor and learner interleaved in one thread, one
// optimizer update per environment step once warm.  This is the baseline the
// distributed topology must match in outcome.

RunReport run_serial(const config::RunConfig& cfg,
                     telemetry::MetricsLogger* logger) {
  const config::TrainingConfig& t = cfg.training;
  auto env = make_env(cfg.environment.name,
                      static_cast<std::uint64_t>(cfg.environment.seed),
                      static_cast<int>(cfg.environment.max_steps));
  QNetConfig qc = net_config_for(env->spec(), cfg.model);
  QNet net(qc, static_cast<std::uint64_t>(cfg.model.seed));
  QNet target = net;
  AdamState opt(net.param_count());
  QNet::Workspace ws;
  std::vector<float> grad(net.param_count(), 0.0f);
  DqnHyper hp = hyper_for(t);
  ReplayBuffer buf(t.buffer_capacity, t.warmup_size, t.batch_size);
  Rng action_rng = Rng(static_cast<std::uint64_t>(cfg.model.seed)).derive(1);
  Rng sample_rng = Rng(static_cast<std::uint64_t>(cfg.model.seed)).derive(2);

  const std::int64_t t0 = now_ns();
  std::vector<std::unique_ptr<GroupState>> states;
  states.push_back(std::make_unique<GroupState>(0, 100, t0));
  GroupState& state = *states.front();
  telemetry::TargetTracker tracker(t.target_return);
  SeriesTrackers rates;
  std::vector<std::size_t> cursors(1, 0);
  RunReport rep;

  const double snap_every = cfg.distribution.control_window_s;
  double next_snap = snap_every;

  std::vector<float> obs =
      env->reset(static_cast<std::uint64_t>(cfg.environment.seed));
  float epsilon = static_cast<float>(t.epsilon);
  double ep_return = 0.0;
  std::int64_t ep_steps = 0;
  std::uint64_t steps = 0;
  std::int64_t fresh_seen = 0;  // new samples since the last update
  StopReason why = StopReason::none;
  std::string err;

  while (why == StopReason::none) {
    const double elapsed = seconds_since(t0);
    if (t.max_seconds > 0.0 && elapsed >= t.max_seconds) {
      why = StopReason::time_limit;
      break;
    }
    if (elapsed >= next_snap) {
      telemetry::Snapshot s = aggregate_snapshot(elapsed, states, rates);
      rep.series.push_back(s);
      if (logger != nullptr && logger->enabled()) logger->write_snapshot(s);
      drain_episodes_to(states, cursors, rep, logger);
      next_snap += snap_every;
    }

    net.forward(obs.data(), ws);
    int action = epsilon_greedy(ws.q, epsilon, action_rng);
    StepResult r = env->step(action);

    Transition tr;
    tr.obs = std::move(obs);
    tr.action = action;
    tr.reward = r.reward;
    tr.next_obs = r.obs;
    tr.done = r.done && !r.truncated;
    tr.truncated = r.truncated;
    tr.policy_version = net.version();
    tr.produced_at_ns = now_ns();
    std::vector<Transition> single;
    single.push_back(std::move(tr));
    buf.push(single);
    state.sample.add(1);
    state.receive.add(1);
    ++steps;
    ++fresh_seen;
    ep_return += r.reward;
    ++ep_steps;

    // The same freshness gate the buffer worker applies: an update only
    // happens once fresh_per_batch new samples arrived since the last one
    // (default 1, i.e. one update per step once warm).
    if (fresh_seen >= t.fresh_per_batch) {
      if (auto batch = buf.sample(t.batch_size, sample_rng)) {
        fresh_seen = 0;
        try {
          dqn_update(net, target, *batch, opt, hp, ws, grad);
        } catch (const std::runtime_error& ex) {
          why = StopReason::diverged;
          err = ex.what();
          break;
        }
        state.updates.fetch_add(1, std::memory_order_relaxed);
        state.train.add(batch->size());
        if (t.target_update_interval > 0 &&
            state.updates.load(std::memory_order_relaxed) %
                    static_cast<std::uint64_t>(t.target_update_interval) ==
                0) {
          sync_target(net, target);
        }
      }
    }

    if (r.done) {
      state.record_episode(ep_return, ep_steps, net.version());
      ep_return = 0.0;
      ep_steps = 0;
      epsilon = std::max(static_cast<float>(t.epsilon_min),
                         epsilon * static_cast<float>(t.epsilon_decay));
      obs = env->reset();
      if (state.update_target(tracker, seconds_since(t0))) {
        why = StopReason::target_reached;
        break;
      }
    } else {
      obs = std::move(r.obs);
    }

    if (t.step_budget > 0 &&
        steps >= static_cast<std::uint64_t>(t.step_budget)) {
      why = StopReason::budget_exhausted;
      break;
    }
  }

  telemetry::Snapshot final_snap =
      aggregate_snapshot(seconds_since(t0), states, rates);
  rep.series.push_back(final_snap);
  if (logger != nullptr && logger->enabled()) logger->write_snapshot(final_snap);
  drain_episodes_to(states, cursors, rep, logger);

  rep.final_time = tracker.final_time();
  rep.versions_published = net.version();
  rep.total_steps = steps;
  rep.total_updates = state.updates.load(std::memory_order_relaxed);
  rep.stop_reason = why;
  rep.error = err;
  rep.staleness = buf.staleness_report(net.version());
  return rep;
}

// ---------------------------------------------------------------------------
// Distributed topology: per group one buffer thread, n_learners learner
// threads, n_actors actor threads, wired with bounded channels; the calling
// thread becomes the orchestrator.

struct GroupRuntime {
  GroupState* state = nullptr;  // owned by the orchestrator's states vector
  std::unique_ptr<ReplayBuffer> buf;

  std::shared_ptr<Channel> traj_ch;
  std::shared_ptr<Channel> req_ch;
  std::vector<std::shared_ptr<Channel>> batch_chs;
  std::vector<std::shared_ptr<Channel>> actor_ctl;
  std::vector<std::shared_ptr<Channel>> learner_ctl;
  std::vector<std::unique_ptr<ParamSub>> subs;

  // Every sender view is created before any worker starts draining.
  std::vector<std::unique_ptr<InProcSender>> actor_traj_tx;
  std::vector<std::unique_ptr<InProcSender>> learner_req_tx;
  std::vector<std::unique_ptr<InProcSender>> buffer_batch_tx;
  std::vector<std::unique_ptr<InProcSender>> actor_ctl_tx;
  std::vector<std::unique_ptr<InProcSender>> learner_ctl_tx;

  std::vector<std::thread> threads;

  telemetry::TargetTracker tracker{0.0};
  telemetry::RateTracker produced_rate;
  telemetry::RateTracker consumed_rate;
  std::optional<strategy::StalenessController> controller;
  std::vector<std::uint64_t> last_actor_pace;
  std::vector<std::uint64_t> last_learner_pace;
};

RunReport run_distributed(const config::RunConfig& cfg,
                          telemetry::MetricsLogger* logger) {
  const config::TrainingConfig& t = cfg.training;
  const config::DistributionConfig& d = cfg.distribution;
  const std::int64_t n_groups = d.n_groups;
  const std::int64_t n_actors = d.n_actors;
  const std::int64_t n_learners = d.n_learners;
  const std::int64_t t0 = now_ns();

  // Probe the env once to size the network; workers build their own copies.
  const QNetConfig qc = net_config_for(
      make_env(cfg.environment.name,
               static_cast<std::uint64_t>(cfg.environment.seed), 1)
          ->spec(),
      cfg.model);

  std::vector<std::unique_ptr<GroupState>> states;
  std::vector<std::unique_ptr<GroupRuntime>> groups;

  for (std::int64_t g = 0; g < n_groups; ++g) {
    states.push_back(std::make_unique<GroupState>(g, 100, t0));
    auto gr = std::make_unique<GroupRuntime>();
    gr->state = states.back().get();
    gr->buf = std::make_unique<ReplayBuffer>(t.buffer_capacity, t.warmup_size,
                                             t.batch_size);
    gr->traj_ch =
        std::make_shared<Channel>(static_cast<std::size_t>(d.queue_depth));
    gr->req_ch = std::make_shared<Channel>(64);
    gr->tracker = telemetry::TargetTracker(t.target_return);
    const auto ctl_window_ns =
        static_cast<std::int64_t>(d.control_window_s * 1e9);
    gr->produced_rate = telemetry::RateTracker(ctl_window_ns);
    gr->consumed_rate = telemetry::RateTracker(ctl_window_ns);
    if (d.staleness_control) {
      gr->controller.emplace(1.0, n_actors, t.batch_size);
    }
    for (std::int64_t l = 0; l < n_learners; ++l) {
      gr->batch_chs.push_back(std::make_shared<Channel>(8));
      gr->learner_ctl.push_back(std::make_shared<Channel>(64));
      gr->learner_req_tx.push_back(std::make_unique<InProcSender>(gr->req_ch));
      gr->buffer_batch_tx.push_back(
          std::make_unique<InProcSender>(gr->batch_chs.back()));
      gr->learner_ctl_tx.push_back(
          std::make_unique<InProcSender>(gr->learner_ctl.back()));
    }
    for (std::int64_t a = 0; a < n_actors; ++a) {
      gr->actor_ctl.push_back(std::make_shared<Channel>(64));
      gr->subs.push_back(std::make_unique<ParamSub>());
      gr->actor_traj_tx.push_back(std::make_unique<InProcSender>(gr->traj_ch));
      gr->actor_ctl_tx.push_back(
          std::make_unique<InProcSender>(gr->actor_ctl.back()));
    }
    gr->last_actor_pace.assign(static_cast<std::size_t>(n_actors), 0);
    gr->last_learner_pace.assign(static_cast<std::size_t>(n_learners), 0);
    groups.push_back(std::move(gr));
  }

  // Spawn: buffer, learners, actors per group.  Wiring is complete, so drain
  // order cannot race sender registration.
  for (auto& group : groups) {
    GroupRuntime* gr = group.get();

    gr->threads.emplace_back([gr, &t] {
      BufferConfig bc;
      bc.batch_size = t.batch_size;
      bc.fresh_per_batch = t.fresh_per_batch;
      bc.n_learners = static_cast<int>(gr->buffer_batch_tx.size());
      bc.rng_seed = mix_seed(0x52eb1a5, gr->state->group_id(), 0);
      try {
        InProcReceiver traj_rx(gr->traj_ch);
        InProcReceiver req_rx(gr->req_ch);
        std::vector<MsgSender*> outs;
        for (auto& tx : gr->buffer_batch_tx) outs.push_back(tx.get());
        buffer_loop(bc, *gr->buf, traj_rx, req_rx, outs, *gr->state);
      } catch (const std::exception& ex) {
        gr->state->request_stop(StopReason::error,
                                std::string("buffer worker: ") + ex.what());
        // Force-close so actors blocked on a full trajectory channel fail
        // over into their clean-shutdown path.
        gr->traj_ch->close();
        for (auto& tx : gr->buffer_batch_tx) tx->close();
      }
    });

    for (std::int64_t l = 0; l < n_learners; ++l) {
      gr->threads.emplace_back([gr, l, &t, &d, &cfg, qc] {
        try {
          QNet net(qc, static_cast<std::uint64_t>(cfg.model.seed));
          QNet target = net;
          AdamState opt(net.param_count());
          LearnerConfig lc;
          lc.learner_id = static_cast<int>(l);
          lc.hyper = hyper_for(t);
          lc.batch_size = t.batch_size;
          lc.target_update_interval = t.target_update_interval;
          lc.publish_interval = d.publish_interval;
          lc.max_updates_per_s = d.learner_max_updates_per_s;
          std::vector<ParamSub*> fanout;
          const std::size_t nl = gr->buffer_batch_tx.size();
          for (std::size_t a = 0; a < gr->subs.size(); ++a) {
            if (a % nl == static_cast<std::size_t>(l)) {
              fanout.push_back(gr->subs[a].get());
            }
          }
          InProcReceiver batch_rx(gr->batch_chs[static_cast<std::size_t>(l)]);
          InProcReceiver ctl_rx(gr->learner_ctl[static_cast<std::size_t>(l)]);
          learner_loop(lc, net, target, opt,
                       *gr->learner_req_tx[static_cast<std::size_t>(l)],
                       batch_rx, fanout, &ctl_rx, *gr->state);
        } catch (const std::exception& ex) {
          gr->state->request_stop(StopReason::error,
                                  std::string("learner worker: ") + ex.what());
          gr->learner_req_tx[static_cast<std::size_t>(l)]->close();
        }
      });
    }

    for (std::int64_t a = 0; a < n_actors; ++a) {
      gr->threads.emplace_back([gr, a, &t, &d, &cfg, qc] {
        try {
          auto env =
              make_env(cfg.environment.name,
                       mix_seed(cfg.environment.seed, gr->state->group_id(), a),
                       static_cast<int>(cfg.environment.max_steps));
          QNet net(qc, static_cast<std::uint64_t>(cfg.model.seed));
          ActorConfig ac;
          ac.actor_id = static_cast<int>(a);
          ac.rollout_length = t.rollout_length;
          ac.epsilon = static_cast<float>(t.epsilon);
          ac.epsilon_decay = static_cast<float>(t.epsilon_decay);
          ac.epsilon_min = static_cast<float>(t.epsilon_min);
          ac.rng_seed = mix_seed(cfg.model.seed, gr->state->group_id(), a);
          ac.env_seed = mix_seed(cfg.environment.seed, gr->state->group_id(), a);
          ac.pace_steps_per_s = d.actor_pace_steps_per_s;
          InProcReceiver ctl_rx(gr->actor_ctl[static_cast<std::size_t>(a)]);
          actor_loop(ac, *env, net,
                     *gr->actor_traj_tx[static_cast<std::size_t>(a)],
                     *gr->subs[static_cast<std::size_t>(a)], &ctl_rx,
                     *gr->state);
        } catch (const std::exception& ex) {
          gr->state->request_stop(StopReason::error,
                                  std::string("actor worker: ") + ex.what());
          gr->actor_traj_tx[static_cast<std::size_t>(a)]->close();
        }
      });
    }
  }

  RunReport rep;
  std::vector<std::size_t> cursors(static_cast<std::size_t>(n_groups), 0);
  SeriesTrackers rates;
  const double snap_every = d.control_window_s;
  double next_snap = snap_every;
  StopReason why = StopReason::none;
  std::string err;

  auto broadcast_stop = [&](StopReason reason, const std::string& msg) {
    if (why != StopReason::none) return;
    why = reason;
    err = msg;
    for (auto& gr : groups) {
      gr->state->request_stop(reason, msg);
      for (auto& tx : gr->actor_ctl_tx) {
        tx->send(make_control_msg(0, ControlCode::stop));
      }
      for (auto& tx : gr->learner_ctl_tx) {
        tx->send(make_control_msg(0, ControlCode::stop));
      }
    }
  };

  while (why == StopReason::none) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const double elapsed = seconds_since(t0);

    for (auto& gr : groups) {
      if (gr->state->stop_requested()) {
        broadcast_stop(gr->state->stop_reason(), gr->state->error());
        break;
      }
    }
    if (why != StopReason::none) break;

    for (auto& gr : groups) {
      if (gr->state->update_target(gr->tracker, elapsed)) {
        rep.final_time = gr->tracker.final_time();
        broadcast_stop(StopReason::target_reached, "");
        break;
      }
    }
    if (why != StopReason::none) break;

    std::uint64_t total_steps = 0;
    for (auto& gr : groups) total_steps += gr->state->sample.count();
    if (t.step_budget > 0 &&
        total_steps >= static_cast<std::uint64_t>(t.step_budget)) {
      broadcast_stop(StopReason::budget_exhausted, "");
      break;
    }
    if (t.max_seconds > 0.0 && elapsed >= t.max_seconds) {
      broadcast_stop(StopReason::time_limit, "");
      break;
    }

    // Controller inputs observed every poll so its window is well sampled;
    // directives go out at window boundaries only.
    const bool window_tick = elapsed >= next_snap;
    for (auto& gr : groups) {
      const std::int64_t t_ns = now_ns();
      double produced =
          gr->produced_rate.observe(t_ns, gr->state->sample.count());
      double consumed =
          gr->consumed_rate.observe(t_ns, gr->state->train.count());
      if (window_tick && gr->controller.has_value()) {
        strategy::PacingDirective dir =
            gr->controller->evaluate(produced, consumed);
        if (dir.action == strategy::PacingAction::pace_actors) {
          auto arg = static_cast<std::uint64_t>(
              std::max<std::int64_t>(1, std::llround(dir.actor_steps_per_s)));
          for (std::size_t a = 0; a < gr->actor_ctl_tx.size(); ++a) {
            if (gr->last_actor_pace[a] != arg) {
              gr->actor_ctl_tx[a]->send(
                  make_control_msg(0, ControlCode::pace_actor, arg));
              gr->last_actor_pace[a] = arg;
            }
          }
        } else if (dir.action == strategy::PacingAction::pace_learner) {
          double per_learner =
              dir.learner_updates_per_s / static_cast<double>(n_learners);
          auto arg = static_cast<std::uint64_t>(
              std::max<std::int64_t>(1, std::llround(per_learner)));
          for (std::size_t l = 0; l < gr->learner_ctl_tx.size(); ++l) {
            if (gr->last_learner_pace[l] != arg) {
              gr->learner_ctl_tx[l]->send(
                  make_control_msg(0, ControlCode::pace_learner, arg));
              gr->last_learner_pace[l] = arg;
            }
          }
        }
      }
    }

    if (window_tick) {
      telemetry::Snapshot s = aggregate_snapshot(elapsed, states, rates);
      rep.series.push_back(s);
      if (logger != nullptr && logger->enabled()) logger->write_snapshot(s);
      drain_episodes_to(states, cursors, rep, logger);
      next_snap += snap_every;
    }
  }

  for (auto& gr : groups) {
    for (auto& th : gr->threads) th.join();
  }

  telemetry::Snapshot final_snap =
      aggregate_snapshot(seconds_since(t0), states, rates);
  rep.series.push_back(final_snap);
  if (logger != nullptr && logger->enabled()) logger->write_snapshot(final_snap);
  drain_episodes_to(states, cursors, rep, logger);

  for (auto& st : states) {
    rep.versions_published +=
        st->versions_published.load(std::memory_order_relaxed);
    rep.total_steps += st->sample.count();
    rep.total_updates += st->updates.load(std::memory_order_relaxed);
    if (rep.error.empty()) rep.error = st->error();
  }
  rep.stop_reason = why;
  if (!err.empty()) rep.error = err;
  rep.staleness = groups.front()->buf->staleness_report(
      states.front()->latest_version.load(std::memory_order_relaxed));
  return rep;
}

}  // namespace

RunReport run_training(const config::RunConfig& cfg,
                       telemetry::MetricsLogger* logger) {
  config::validate(cfg);
  if (cfg.distribution.mode == config::Mode::serial) {
    return run_serial(cfg, logger);
  }
  if (cfg.distribution.transport != config::Transport::inproc) {
    throw std::invalid_argument(
        "training runs drive workers as threads over in-process channels; "
        "transport=tcp applies to commbench and profile");
  }
  return run_distributed(cfg, logger);
}

}  // namespace pushrl::runtime
