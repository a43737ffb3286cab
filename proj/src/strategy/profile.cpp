#include "pushrl/strategy/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include "pushrl/algo/learning.hpp"
#include "pushrl/comms/tcp.hpp"
#include "pushrl/kernels/kernels.hpp"
#include "pushrl/util/rng.hpp"
#include "pushrl/util/time.hpp"

namespace pushrl::strategy {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

[[noreturn]] void too_short(const char* stage) {
  throw std::runtime_error(std::string("profile: duration too short to collect "
                                       "20 timing samples for the ") +
                           stage + " stage");
}

// Synthetic transitions shaped like the configured environment, for learner
// and transport micro-runs that must not depend on env dynamics.
std::vector<Transition> synthetic_batch(const EnvSpec& spec, std::size_t n,
                                        Rng& rng) {
  std::vector<Transition> batch(n);
  for (auto& tr : batch) {
    tr.obs.resize(spec.obs_dim);
    tr.next_obs.resize(spec.obs_dim);
    for (std::size_t i = 0; i < spec.obs_dim; ++i) {
      tr.obs[i] = rng.uniform_f32(-1.0f, 1.0f);
      tr.next_obs[i] = rng.uniform_f32(-1.0f, 1.0f);
    }
    tr.action = static_cast<int>(rng.bounded(static_cast<uint64_t>(spec.n_actions)));
    tr.reward = rng.uniform_f32(-1.0f, 1.0f);
    tr.done = rng.bounded(10) == 0;
    tr.truncated = false;
  }
  return batch;
}

}  // namespace

StageTiming measure_actor_stage(Env& env, const QNet& net, float epsilon,
                                double duration_s, int steps_per_chunk,
                                int min_chunks) {
  QNet::Workspace ws;
  Rng rng(12345);
  std::vector<float> obs = env.reset(1);
  std::vector<double> rates;
  rates.reserve(1024);
  int64_t t_begin = now_ns();
  while (seconds_since(t_begin) < duration_s || static_cast<int>(rates.size()) < min_chunks) {
    if (seconds_since(t_begin) >= duration_s && static_cast<int>(rates.size()) < min_chunks) {
      too_short("actor");
    }
    int64_t c0 = now_ns();
    for (int s = 0; s < steps_per_chunk; ++s) {
      net.forward(obs.data(), ws);
      int a = epsilon_greedy(ws.q, epsilon, rng);
      StepResult r = env.step(a);
      obs = r.done ? env.reset() : std::move(r.obs);
    }
    double dt = seconds_since(c0);
    if (dt > 0.0) {
      rates.push_back(steps_per_chunk / dt);
    }
    if (rates.size() >= 20000) {
      break;
    }
  }
  StageTiming out;
  out.chunks = static_cast<int>(rates.size());
  out.rate = median(std::move(rates));
  out.per_event = 1.0 / out.rate;
  return out;
}

StageTiming measure_learner_stage(const config::RunConfig& cfg, double duration_s,
                                  int updates_per_chunk, int min_chunks) {
  auto env = make_env(cfg.environment.name, 1,
                      static_cast<int>(cfg.environment.max_steps));
  const EnvSpec& spec = env->spec();
  QNetConfig qc;
  qc.obs_dim = spec.obs_dim;
  qc.n_actions = spec.n_actions;
  qc.hidden = static_cast<int>(cfg.model.hidden);
  QNet net(qc, static_cast<uint64_t>(cfg.model.seed));
  QNet target(qc, static_cast<uint64_t>(cfg.model.seed));
  AdamState opt(net.param_count());
  DqnHyper hp;
  hp.gamma = static_cast<float>(cfg.training.gamma);
  // Vanishing step size: we are timing the arithmetic, not training, and a
  // real learning rate on random targets could blow the loss up mid-profile.
  hp.lr = 1e-9f;
  QNet::Workspace ws;
  std::vector<float> grad;

  Rng rng(777);
  auto batch = synthetic_batch(spec, static_cast<std::size_t>(cfg.training.batch_size),
                               rng);
  std::vector<double> rates;
  rates.reserve(1024);
  int64_t t_begin = now_ns();
  while (seconds_since(t_begin) < duration_s || static_cast<int>(rates.size()) < min_chunks) {
    if (seconds_since(t_begin) >= duration_s && static_cast<int>(rates.size()) < min_chunks) {
      too_short("learner");
    }
    int64_t c0 = now_ns();
    for (int u = 0; u < updates_per_chunk; ++u) {
      dqn_update(net, target, batch, opt, hp, ws, grad);
    }
    double dt = seconds_since(c0);
    if (dt > 0.0) {
      rates.push_back(updates_per_chunk / dt);
    }
    if (rates.size() >= 20000) {
      break;
    }
  }
  StageTiming out;
  out.chunks = static_cast<int>(rates.size());
  out.rate = median(std::move(rates)) * static_cast<double>(cfg.training.batch_size);
  out.per_event = 1.0 / out.rate;
  return out;
}

TransportTiming measure_transport_stage(MsgSender& tx, MsgReceiver& rx,
                                        const Envelope& msg, int n_messages,
                                        int min_samples) {
  if (n_messages < min_samples) {
    too_short("transport");
  }
  std::vector<double> send_times(static_cast<std::size_t>(n_messages));
  std::thread sender([&] {
    for (int i = 0; i < n_messages; ++i) {
      int64_t t0 = now_ns();
      tx.send(msg);
      send_times[static_cast<std::size_t>(i)] = seconds_since(t0);
    }
    tx.close();
  });

  int received = 0;
  int64_t probe_ns = 0;
  Envelope in;
  for (;;) {
    int64_t t0 = now_ns();
    ProbeStatus st = rx.probe(in);
    probe_ns += now_ns() - t0;
    if (st == ProbeStatus::message) {
      ++received;
    } else if (st == ProbeStatus::closed) {
      break;
    } else {
      std::this_thread::yield();
    }
  }
  sender.join();
  if (received != n_messages) {
    throw std::runtime_error("profile: transport dropped messages");
  }
  TransportTiming out;
  out.t_sd = median(std::move(send_times));
  out.t_rv = static_cast<double>(probe_ns) * 1e-9 / n_messages;
  return out;
}

ThroughputProfile measure_profile(const config::RunConfig& cfg, double duration_s) {
  double stage_s = duration_s / 3.0;

  auto env = make_env(cfg.environment.name,
                      static_cast<uint64_t>(cfg.environment.seed),
                      static_cast<int>(cfg.environment.max_steps));
  const EnvSpec& spec = env->spec();
  QNetConfig qc;
  qc.obs_dim = spec.obs_dim;
  qc.n_actions = spec.n_actions;
  qc.hidden = static_cast<int>(cfg.model.hidden);
  QNet net(qc, static_cast<uint64_t>(cfg.model.seed));

  StageTiming actor = measure_actor_stage(*env, net,
                                          static_cast<float>(cfg.training.epsilon),
                                          stage_s);
  StageTiming learner = measure_learner_stage(cfg, stage_s);

  // Transport echo with a rollout-sized trajectory message.
  Rng rng(4242);
  auto rollout = synthetic_batch(
      spec, static_cast<std::size_t>(cfg.training.rollout_length), rng);
  Envelope msg = make_trajectory_msg(0, 0, rollout);
  TransportTiming wire;
  int n_messages = 400;
  if (cfg.distribution.transport == config::Transport::tcp) {
    TcpReceiver rx(static_cast<uint16_t>(cfg.distribution.tcp_port_base));
    TcpSender tx(rx.port());
    rx.accept_senders(1);
    wire = measure_transport_stage(tx, rx, msg, n_messages);
  } else {
    auto ch = std::make_shared<Channel>(
        static_cast<std::size_t>(cfg.distribution.queue_depth));
    InProcSender tx(ch);
    InProcReceiver rx(ch);
    wire = measure_transport_stage(tx, rx, msg, n_messages);
  }

  ThroughputProfile p;
  p.tr_a1 = actor.rate;
  p.t_sp = actor.per_event;
  p.tr_l1 = learner.rate;
  p.l_sat_cores = 1.0;  // measured on one core; no multi-core sweep here
  p.t_sd = wire.t_sd;
  p.t_rv = wire.t_rv;
  std::ostringstream os;
  os << cfg.environment.name << " hidden=" << cfg.model.hidden << " batch="
     << cfg.training.batch_size << " "
     << config::transport_name(cfg.distribution.transport) << " "
     << std::thread::hardware_concurrency() << " cores "
     << kernels::backend_name(kernels::active_backend());
  p.measured_on = os.str();
  return p;
}

std::string serialize_profile(const ThroughputProfile& p) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "[profile]\n";
  os << "tr_a1 = " << num(p.tr_a1) << "\n";
  os << "tr_l1 = " << num(p.tr_l1) << "\n";
  os << "l_sat_cores = " << num(p.l_sat_cores) << "\n";
  os << "t_sp = " << num(p.t_sp) << "\n";
  os << "t_sd = " << num(p.t_sd) << "\n";
  os << "t_rv = " << num(p.t_rv) << "\n";
  os << "measured_on = " << p.measured_on << "\n";
  return os.str();
}

ThroughputProfile parse_profile_text(const std::string& text,
                                     const std::string& origin) {
  ThroughputProfile p;
  for (const config::IniEntry& e : config::scan_ini(text, origin)) {
    if (e.section != "profile") {
      throw config::ConfigError(origin + ":" + std::to_string(e.line) +
                                ": unknown section [" + e.section +
                                "] (expected [profile])");
    }
    auto num = [&](double& dst) {
      try {
        std::size_t used = 0;
        dst = std::stod(e.value, &used);
        if (used != e.value.size()) {
          throw std::invalid_argument("trailing junk");
        }
      } catch (const std::exception&) {
        throw config::ConfigError(origin + ":" + std::to_string(e.line) +
                                  ": invalid number for 'profile." + e.key + "'");
      }
    };
    if (e.key == "tr_a1") {
      num(p.tr_a1);
    } else if (e.key == "tr_l1") {
      num(p.tr_l1);
    } else if (e.key == "l_sat_cores") {
      num(p.l_sat_cores);
    } else if (e.key == "t_sp") {
      num(p.t_sp);
    } else if (e.key == "t_sd") {
      num(p.t_sd);
    } else if (e.key == "t_rv") {
      num(p.t_rv);
    } else if (e.key == "measured_on") {
      p.measured_on = e.value;
    } else {
      throw config::ConfigError(origin + ":" + std::to_string(e.line) +
                                ": unknown key '" + e.key + "' in [profile]");
    }
  }
  if (!(p.tr_a1 > 0.0 && std::isfinite(p.tr_a1)) ||
      !(p.tr_l1 > 0.0 && std::isfinite(p.tr_l1)) ||
      !(p.l_sat_cores > 0.0 && std::isfinite(p.l_sat_cores)) ||
      !(p.t_sp > 0.0 && std::isfinite(p.t_sp)) ||
      !(p.t_sd > 0.0 && std::isfinite(p.t_sd)) ||
      !(p.t_rv > 0.0 && std::isfinite(p.t_rv))) {
    throw config::ConfigError(origin + ": profile values must be positive and finite");
  }
  return p;
}

ThroughputProfile parse_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw config::ConfigError("cannot open profile file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_profile_text(buf.str(), path);
}

}  // namespace pushrl::strategy
