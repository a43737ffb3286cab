#pragma once
// Run configuration: a restricted INI-style text format with four core
// sections -- [distribution], [training], [model], [environment] -- plus an
// optional [commbench] section for the communication benchmark. Every field
// has a default, unknown sections/keys are hard errors, and a serialized
// config re-parses to an equal value.
//
// Grammar, line by line:
//   - blank lines and comments ('#' or ';' to end of line) are ignored
//   - '[section]' switches the current section
//   - 'key = value' assigns within the current section (last write wins)
// Values are trimmed; strings may contain spaces but not '#' or ';'.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pushrl::config {

// Parse or validation failure; the message carries "origin:line:" context
// when the failure is tied to a specific line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One key/value occurrence from the low-level scanner, with its 1-based line.
struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

// Tokenizes the INI text shared by config, profile, and plan documents.
// Throws ConfigError for malformed lines (missing '=', bare text, unclosed
// section header, assignment before any section).
std::vector<IniEntry> scan_ini(const std::string& text, const std::string& origin);

enum class Mode : int { serial = 0, distributed = 1 };
enum class Transport : int { inproc = 0, tcp = 1 };

const char* mode_name(Mode m);
const char* transport_name(Transport t);

// [distribution] -- worker topology and messaging.
struct DistributionConfig {
  Mode mode = Mode::distributed;
  std::int64_t n_actors = 1;
  std::int64_t n_learners = 1;
  std::int64_t n_groups = 1;
  Transport transport = Transport::inproc;
  std::int64_t tcp_port_base = 0;  // 0 = ephemeral ports
  std::int64_t queue_depth = 1024;
  std::int64_t publish_interval = 1;  // updates between parameter publications
  std::int64_t cores = 0;             // 0 = detect at runtime
  double actor_pace_steps_per_s = 0.0;      // 0 = unpaced
  double learner_max_updates_per_s = 0.0;   // 0 = unpaced
  bool staleness_control = false;
  double control_window_s = 1.0;

  bool operator==(const DistributionConfig&) const = default;
};

// [training] -- optimization hyperparameters and stop conditions.
struct TrainingConfig {
  double gamma = 0.99;
  double learning_rate = 5e-4;
  double epsilon = 1.0;
  double epsilon_decay = 0.98;  // multiplied in per finished episode
  double epsilon_min = 0.01;
  std::int64_t target_update_interval = 100;
  std::int64_t batch_size = 32;
  std::int64_t buffer_capacity = 2048;
  std::int64_t warmup_size = 32;
  std::int64_t rollout_length = 16;
  // Minimum newly-ingested samples between consecutive batches served to one
  // consumer.  0 disables the gate; batch_size forces fully fresh data.
  std::int64_t fresh_per_batch = 1;
  std::int64_t step_budget = 300000;  // global env steps; 0 = unlimited
  double target_return = 195.0;       // window-100 mean triggering success
  double max_seconds = 0.0;           // wall-clock cap; 0 = unlimited

  bool operator==(const TrainingConfig&) const = default;
};

// [model] -- Q-network shape and initialization.
struct ModelConfig {
  std::int64_t hidden = 256;  // 0 = linear model
  std::int64_t seed = 1;

  bool operator==(const ModelConfig&) const = default;
};

// [environment] -- which environment to run and how to seed it.
struct EnvironmentConfig {
  std::string name = "cartpole";
  std::int64_t seed = 1;
  std::int64_t max_steps = 0;  // 0 = environment default

  bool operator==(const EnvironmentConfig&) const = default;
};

// [commbench] -- virtual communication experiment knobs (senders and
// transport come from [distribution]).
struct CommbenchConfig {
  std::int64_t message_bytes = 4096;  // payload size per trajectory message
  double sample_time_s = 0.001;       // simulated per-sample production time
  std::int64_t n_samples = 10000;     // receiver stops after this many
  double receive_time_s = 0.0;        // simulated per-message processing at
                                      // the receiver; 0 = pure transport

  bool operator==(const CommbenchConfig&) const = default;
};

struct RunConfig {
  DistributionConfig distribution;
  TrainingConfig training;
  ModelConfig model;
  EnvironmentConfig environment;
  CommbenchConfig commbench;

  bool operator==(const RunConfig&) const = default;
};

// Parses and validates a config file. Every key is optional; missing keys
// keep their defaults.
RunConfig parse_config(const std::string& path);

// Same, from in-memory text; `origin` labels error messages.
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<config>");

// Cross-field validation, also called by the parsers. Throws ConfigError
// naming the offending field.
void validate(const RunConfig& cfg);

// Canonical text form; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

}  // namespace pushrl::config
