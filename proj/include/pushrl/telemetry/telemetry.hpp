#pragma once
// Run telemetry: episode-return tracking, monotone throughput counters with
// sliding-window rates, target-crossing detection, and JSON-lines metrics
// emission.
//
// Ownership rules (mirrored by the runtime): each ThroughputCounter is
// incremented by exactly one owning worker thread and read by the
// orchestrator; ReturnWindow, RateTracker, TargetTracker, and MetricsLogger
// are single-threaded and live on the orchestrator side.

#include <atomic>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

namespace pushrl::telemetry {

// Ring of the most recent episode returns (default: last 100). The mean is
// recomputed from the current contents on every query, so it is exactly the
// arithmetic mean of what the window holds -- no drifting running sum.
class ReturnWindow {
 public:
  explicit ReturnWindow(std::size_t capacity = 100);

  // Appends one episode return, evicting the oldest entry when full, and
  // returns the updated mean. Throws std::invalid_argument on a non-finite
  // return.
  double record(double episode_return);

  // Exact mean over current contents; 0.0 when empty.
  double mean() const;

  std::size_t size() const { return returns_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return returns_.size() == capacity_; }

 private:
  std::size_t capacity_;
  std::deque<double> returns_;
};

// Which stream of events a counter measures.
enum class Stream : int { sample = 0, receive = 1, train = 2 };
const char* stream_name(Stream s);

// Monotone event counter. add() must be called only from the owning worker;
// count() may be called from any thread.
class ThroughputCounter {
 public:
  void add(std::uint64_t n = 1) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t count() const { return count_.load(std::memory_order_acquire); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

// Turns a monotone counter into an events-per-second rate over a sliding time
// window (default 1 s). The reader feeds it (timestamp, count) observations;
// the rate is the count delta across the observations retained inside the
// window divided by the time they span. Fewer than two observations, or zero
// elapsed time, yields a rate of 0.
class RateTracker {
 public:
  explicit RateTracker(std::int64_t window_ns = 1'000'000'000);

  // Records one observation and returns the updated rate. Timestamps must be
  // non-decreasing and counts monotone; violations throw std::logic_error.
  double observe(std::int64_t t_ns, std::uint64_t count);

  double rate() const;

 private:
  struct Sample {
    std::int64_t t_ns;
    std::uint64_t count;
  };
  std::int64_t window_ns_;
  std::deque<Sample> samples_;
};

// Watches an episode-return window for the first time its mean reaches the
// target and remembers that crossing time forever. By default a crossing is
// only declared once the window is full, so early lucky episodes cannot
// terminate a run before the mean is taken over the advertised span.
class TargetTracker {
 public:
  explicit TargetTracker(double target, bool require_full_window = true);

  // Returns true exactly once: on the first update where the window mean
  // reaches the target.
  bool update(const ReturnWindow& window, double elapsed_s);

  std::optional<double> final_time() const { return final_time_; }
  double target() const { return target_; }

 private:
  double target_;
  bool require_full_window_;
  std::optional<double> final_time_;
};

// Consistent point-in-time view of all counters plus the return window,
// produced by the orchestrator and emitted as one JSON-lines row.
struct Snapshot {
  double t_s = 0.0;  // seconds since run start
  std::uint64_t sample_count = 0;
  std::uint64_t receive_count = 0;
  std::uint64_t train_count = 0;
  double sample_rate = 0.0;  // steps/s over the rate window
  double receive_rate = 0.0;
  double train_rate = 0.0;
  std::uint64_t episodes = 0;
  double window_mean = 0.0;
  std::uint64_t versions_published = 0;
};

// Serializes metric rows as JSON lines. Every row carries a "t" field
// (seconds since logger construction) that is strictly increasing across
// emissions, even when rows are written faster than the clock ticks.
class MetricsLogger {
 public:
  // Opens (truncates) the given path; an empty path disables output.
  explicit MetricsLogger(const std::string& path);
  // Writes to a caller-owned stream (used by tests).
  explicit MetricsLogger(std::ostream& out);
  ~MetricsLogger();

  MetricsLogger(const MetricsLogger&) = delete;
  MetricsLogger& operator=(const MetricsLogger&) = delete;

  bool enabled() const { return out_ != nullptr; }

  // Stamps "t" (overwriting any caller-supplied value) and appends one line.
  void write_row(nlohmann::json row);

  // Typed row writers used by the runtime.
  void write_snapshot(const Snapshot& s);
  void write_episode(std::uint64_t index, double episode_return,
                     std::uint64_t steps, double wall_s, std::uint64_t policy_version,
                     std::int64_t group = 0);

  double last_t() const { return last_t_; }

 private:
  double stamp();

  std::ostream* out_ = nullptr;
  bool owns_stream_ = false;
  std::int64_t start_ns_ = 0;
  double last_t_ = -1.0;
};

}  // namespace pushrl::telemetry
