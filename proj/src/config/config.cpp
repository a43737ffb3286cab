#include "pushrl/config/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace pushrl::config {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::int64_t to_i64(const IniEntry& e, const std::string& origin) {
  std::int64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    fail_at(origin, e.line,
            "invalid integer for '" + e.section + "." + e.key + "': '" + e.value + "'");
  }
  return v;
}

double to_f64(const IniEntry& e, const std::string& origin) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail_at(origin, e.line,
            "invalid number for '" + e.section + "." + e.key + "': '" + e.value + "'");
  }
  return v;
}

bool to_bool(const IniEntry& e, const std::string& origin) {
  const std::string& v = e.value;
  if (v == "on" || v == "true" || v == "1" || v == "yes") {
    return true;
  }
  if (v == "off" || v == "false" || v == "0" || v == "no") {
    return false;
  }
  fail_at(origin, e.line,
          "invalid boolean for '" + e.section + "." + e.key + "': '" + e.value +
              "' (use on/off)");
}

// Shortest decimal form that parses back to exactly the same double.
std::string fmt_f64(double v) {
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    double back = 0.0;
    std::string s = os.str();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    if (ec == std::errc() && ptr == s.data() + s.size() && back == v) {
      return s;
    }
  }
  return std::to_string(v);
}

void apply_entry(RunConfig& cfg, const IniEntry& e, const std::string& origin) {
  auto& d = cfg.distribution;
  auto& t = cfg.training;
  auto& m = cfg.model;
  auto& env = cfg.environment;
  auto& cb = cfg.commbench;

  if (e.section == "distribution") {
    if (e.key == "mode") {
      if (e.value == "serial") {
        d.mode = Mode::serial;
      } else if (e.value == "distributed") {
        d.mode = Mode::distributed;
      } else {
        fail_at(origin, e.line, "distribution.mode must be 'serial' or 'distributed'");
      }
    } else if (e.key == "n_actors") {
      d.n_actors = to_i64(e, origin);
    } else if (e.key == "n_learners") {
      d.n_learners = to_i64(e, origin);
    } else if (e.key == "n_groups") {
      d.n_groups = to_i64(e, origin);
    } else if (e.key == "transport") {
      if (e.value == "inproc") {
        d.transport = Transport::inproc;
      } else if (e.value == "tcp") {
        d.transport = Transport::tcp;
      } else {
        fail_at(origin, e.line, "distribution.transport must be 'inproc' or 'tcp'");
      }
    } else if (e.key == "tcp_port_base") {
      d.tcp_port_base = to_i64(e, origin);
    } else if (e.key == "queue_depth") {
      d.queue_depth = to_i64(e, origin);
    } else if (e.key == "publish_interval") {
      d.publish_interval = to_i64(e, origin);
    } else if (e.key == "cores") {
      d.cores = to_i64(e, origin);
    } else if (e.key == "actor_pace_steps_per_s") {
      d.actor_pace_steps_per_s = to_f64(e, origin);
    } else if (e.key == "learner_max_updates_per_s") {
      d.learner_max_updates_per_s = to_f64(e, origin);
    } else if (e.key == "staleness_control") {
      d.staleness_control = to_bool(e, origin);
    } else if (e.key == "control_window_s") {
      d.control_window_s = to_f64(e, origin);
    } else {
      fail_at(origin, e.line, "unknown key '" + e.key + "' in [distribution]");
    }
  } else if (e.section == "training") {
    if (e.key == "gamma") {
      t.gamma = to_f64(e, origin);
    } else if (e.key == "learning_rate") {
      t.learning_rate = to_f64(e, origin);
    } else if (e.key == "epsilon") {
      t.epsilon = to_f64(e, origin);
    } else if (e.key == "epsilon_decay") {
      t.epsilon_decay = to_f64(e, origin);
    } else if (e.key == "epsilon_min") {
      t.epsilon_min = to_f64(e, origin);
    } else if (e.key == "target_update_interval") {
      t.target_update_interval = to_i64(e, origin);
    } else if (e.key == "batch_size") {
      t.batch_size = to_i64(e, origin);
    } else if (e.key == "buffer_capacity") {
      t.buffer_capacity = to_i64(e, origin);
    } else if (e.key == "warmup_size") {
      t.warmup_size = to_i64(e, origin);
    } else if (e.key == "rollout_length") {
      t.rollout_length = to_i64(e, origin);
    } else if (e.key == "fresh_per_batch") {
      t.fresh_per_batch = to_i64(e, origin);
    } else if (e.key == "step_budget") {
      t.step_budget = to_i64(e, origin);
    } else if (e.key == "target_return") {
      t.target_return = to_f64(e, origin);
    } else if (e.key == "max_seconds") {
      t.max_seconds = to_f64(e, origin);
    } else {
      fail_at(origin, e.line, "unknown key '" + e.key + "' in [training]");
    }
  } else if (e.section == "model") {
    if (e.key == "hidden") {
      m.hidden = to_i64(e, origin);
    } else if (e.key == "seed") {
      m.seed = to_i64(e, origin);
    } else {
      fail_at(origin, e.line, "unknown key '" + e.key + "' in [model]");
    }
  } else if (e.section == "environment") {
    if (e.key == "name") {
      env.name = e.value;
    } else if (e.key == "seed") {
      env.seed = to_i64(e, origin);
    } else if (e.key == "max_steps") {
      env.max_steps = to_i64(e, origin);
    } else {
      fail_at(origin, e.line, "unknown key '" + e.key + "' in [environment]");
    }
  } else if (e.section == "commbench") {
    if (e.key == "message_bytes") {
      cb.message_bytes = to_i64(e, origin);
    } else if (e.key == "sample_time_s") {
      cb.sample_time_s = to_f64(e, origin);
    } else if (e.key == "n_samples") {
      cb.n_samples = to_i64(e, origin);
    } else if (e.key == "receive_time_s") {
      cb.receive_time_s = to_f64(e, origin);
    } else {
      fail_at(origin, e.line, "unknown key '" + e.key + "' in [commbench]");
    }
  } else {
    fail_at(origin, e.line, "unknown section [" + e.section + "]");
  }
}

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
  throw ConfigError("invalid config: " + field + " " + why);
}

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) {
    fail_field(field, why);
  }
}

}  // namespace

std::vector<IniEntry> scan_ini(const std::string& text, const std::string& origin) {
  std::vector<IniEntry> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::size_t cut = raw.find_first_of("#;");
    std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail_at(origin, line_no, "malformed section header: '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        fail_at(origin, line_no, "empty section name");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail_at(origin, line_no, "expected 'key = value', got '" + line + "'");
    }
    if (section.empty()) {
      fail_at(origin, line_no, "assignment before any [section] header");
    }
    IniEntry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) {
      fail_at(origin, line_no, "empty key");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

const char* mode_name(Mode m) {
  return m == Mode::serial ? "serial" : "distributed";
}

const char* transport_name(Transport t) {
  return t == Transport::inproc ? "inproc" : "tcp";
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  for (const IniEntry& e : scan_ini(text, origin)) {
    apply_entry(cfg, e, origin);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate(const RunConfig& cfg) {
  const auto& d = cfg.distribution;
  const auto& t = cfg.training;
  const auto& m = cfg.model;
  const auto& e = cfg.environment;
  const auto& cb = cfg.commbench;

  require(d.n_actors >= 1, "distribution.n_actors", "must be >= 1");
  require(d.n_learners >= 1, "distribution.n_learners", "must be >= 1");
  require(d.n_groups >= 1, "distribution.n_groups", "must be >= 1");
  if (d.mode == Mode::serial) {
    require(d.n_actors == 1 && d.n_learners == 1 && d.n_groups == 1,
            "distribution.mode", "serial requires n_actors=1, n_learners=1, n_groups=1");
  }
  require(d.tcp_port_base >= 0 && d.tcp_port_base <= 65535, "distribution.tcp_port_base",
          "must be in [0, 65535]");
  require(d.queue_depth >= 1, "distribution.queue_depth", "must be >= 1");
  require(d.publish_interval >= 1, "distribution.publish_interval", "must be >= 1");
  require(d.cores >= 0, "distribution.cores", "must be >= 0 (0 = detect)");
  require(d.actor_pace_steps_per_s >= 0.0, "distribution.actor_pace_steps_per_s",
          "must be >= 0");
  require(d.learner_max_updates_per_s >= 0.0, "distribution.learner_max_updates_per_s",
          "must be >= 0");
  require(d.control_window_s > 0.0, "distribution.control_window_s", "must be > 0");

  require(t.gamma > 0.0 && t.gamma <= 1.0, "training.gamma", "must be in (0, 1]");
  require(t.learning_rate > 0.0, "training.learning_rate", "must be > 0");
  require(t.epsilon >= 0.0 && t.epsilon <= 1.0, "training.epsilon", "must be in [0, 1]");
  require(t.epsilon_decay > 0.0 && t.epsilon_decay <= 1.0, "training.epsilon_decay",
          "must be in (0, 1]");
  require(t.epsilon_min >= 0.0 && t.epsilon_min <= t.epsilon, "training.epsilon_min",
          "must be in [0, epsilon]");
  require(t.target_update_interval >= 1, "training.target_update_interval",
          "must be >= 1");
  require(t.batch_size >= 1, "training.batch_size", "must be >= 1");
  require(t.buffer_capacity >= t.batch_size, "training.batch_size",
          "must be <= training.buffer_capacity");
  require(t.warmup_size >= 1 && t.warmup_size <= t.buffer_capacity,
          "training.warmup_size", "must be in [1, buffer_capacity]");
  require(t.rollout_length >= 1, "training.rollout_length", "must be >= 1");
  require(t.fresh_per_batch >= 0 && t.fresh_per_batch <= t.batch_size,
          "training.fresh_per_batch", "must be in [0, batch_size]");
  require(t.step_budget >= 0, "training.step_budget", "must be >= 0 (0 = unlimited)");
  require(std::isfinite(t.target_return), "training.target_return", "must be finite");
  require(t.max_seconds >= 0.0, "training.max_seconds", "must be >= 0 (0 = unlimited)");

  require(m.hidden >= 0, "model.hidden", "must be >= 0 (0 = linear)");
  require(m.seed >= 0, "model.seed", "must be >= 0");

  require(e.name == "cartpole" || e.name == "gridworld", "environment.name",
          "must be 'cartpole' or 'gridworld'");
  require(e.seed >= 0, "environment.seed", "must be >= 0");
  require(e.max_steps >= 0, "environment.max_steps", "must be >= 0 (0 = default)");

  require(cb.message_bytes >= 0 && cb.message_bytes <= (1LL << 30),
          "commbench.message_bytes", "must be in [0, 2^30]");
  require(cb.sample_time_s >= 0.0, "commbench.sample_time_s", "must be >= 0");
  require(cb.n_samples >= 1, "commbench.n_samples", "must be >= 1");
  require(cb.receive_time_s >= 0.0, "commbench.receive_time_s", "must be >= 0");
}

std::string serialize(const RunConfig& cfg) {
  const auto& d = cfg.distribution;
  const auto& t = cfg.training;
  const auto& m = cfg.model;
  const auto& e = cfg.environment;
  const auto& cb = cfg.commbench;

  std::ostringstream os;
  os << "[distribution]\n";
  os << "mode = " << mode_name(d.mode) << "\n";
  os << "n_actors = " << d.n_actors << "\n";
  os << "n_learners = " << d.n_learners << "\n";
  os << "n_groups = " << d.n_groups << "\n";
  os << "transport = " << transport_name(d.transport) << "\n";
  os << "tcp_port_base = " << d.tcp_port_base << "\n";
  os << "queue_depth = " << d.queue_depth << "\n";
  os << "publish_interval = " << d.publish_interval << "\n";
  os << "cores = " << d.cores << "\n";
  os << "actor_pace_steps_per_s = " << fmt_f64(d.actor_pace_steps_per_s) << "\n";
  os << "learner_max_updates_per_s = " << fmt_f64(d.learner_max_updates_per_s) << "\n";
  os << "staleness_control = " << (d.staleness_control ? "on" : "off") << "\n";
  os << "control_window_s = " << fmt_f64(d.control_window_s) << "\n";
  os << "\n[training]\n";
  os << "gamma = " << fmt_f64(t.gamma) << "\n";
  os << "learning_rate = " << fmt_f64(t.learning_rate) << "\n";
  os << "epsilon = " << fmt_f64(t.epsilon) << "\n";
  os << "epsilon_decay = " << fmt_f64(t.epsilon_decay) << "\n";
  os << "epsilon_min = " << fmt_f64(t.epsilon_min) << "\n";
  os << "target_update_interval = " << t.target_update_interval << "\n";
  os << "batch_size = " << t.batch_size << "\n";
  os << "buffer_capacity = " << t.buffer_capacity << "\n";
  os << "warmup_size = " << t.warmup_size << "\n";
  os << "rollout_length = " << t.rollout_length << "\n";
  os << "fresh_per_batch = " << t.fresh_per_batch << "\n";
  os << "step_budget = " << t.step_budget << "\n";
  os << "target_return = " << fmt_f64(t.target_return) << "\n";
  os << "max_seconds = " << fmt_f64(t.max_seconds) << "\n";
  os << "\n[model]\n";
  os << "hidden = " << m.hidden << "\n";
  os << "seed = " << m.seed << "\n";
  os << "\n[environment]\n";
  os << "name = " << e.name << "\n";
  os << "seed = " << e.seed << "\n";
  os << "max_steps = " << e.max_steps << "\n";
  os << "\n[commbench]\n";
  os << "message_bytes = " << cb.message_bytes << "\n";
  os << "sample_time_s = " << fmt_f64(cb.sample_time_s) << "\n";
  os << "n_samples = " << cb.n_samples << "\n";
  os << "receive_time_s = " << fmt_f64(cb.receive_time_s) << "\n";
  return os.str();
}

}  // namespace pushrl::config
