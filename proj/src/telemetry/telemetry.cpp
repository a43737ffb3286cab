#include "pushrl/telemetry/telemetry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pushrl/util/time.hpp"

namespace pushrl::telemetry {

ReturnWindow::ReturnWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("ReturnWindow capacity must be positive");
  }
}

double ReturnWindow::record(double episode_return) {
  if (!std::isfinite(episode_return)) {
    throw std::invalid_argument("ReturnWindow: non-finite episode return");
  }
  if (returns_.size() == capacity_) {
    returns_.pop_front();
  }
  returns_.push_back(episode_return);
  return mean();
}

double ReturnWindow::mean() const {
  if (returns_.empty()) {
    return 0.0;
  }
  double sum = std::accumulate(returns_.begin(), returns_.end(), 0.0);
  return sum / static_cast<double>(returns_.size());
}

const char* stream_name(Stream s) {
  switch (s) {
    case Stream::sample:
      return "sample";
    case Stream::receive:
      return "receive";
    case Stream::train:
      return "train";
  }
  return "unknown";
}

RateTracker::RateTracker(std::int64_t window_ns) : window_ns_(window_ns) {
  if (window_ns_ <= 0) {
    throw std::invalid_argument("RateTracker window must be positive");
  }
}

double RateTracker::observe(std::int64_t t_ns, std::uint64_t count) {
  if (!samples_.empty()) {
    if (t_ns < samples_.back().t_ns) {
      throw std::logic_error("RateTracker: timestamps must be non-decreasing");
    }
    if (count < samples_.back().count) {
      throw std::logic_error("RateTracker: counter went backwards");
    }
  }
  samples_.push_back({t_ns, count});
  while (samples_.front().t_ns < t_ns - window_ns_) {
    samples_.pop_front();
  }
  return rate();
}

double RateTracker::rate() const {
  if (samples_.size() < 2) {
    return 0.0;
  }
  const Sample& oldest = samples_.front();
  const Sample& newest = samples_.back();
  if (newest.t_ns <= oldest.t_ns) {
    return 0.0;
  }
  double events = static_cast<double>(newest.count - oldest.count);
  double span_s = static_cast<double>(newest.t_ns - oldest.t_ns) * 1e-9;
  return events / span_s;
}

TargetTracker::TargetTracker(double target, bool require_full_window)
    : target_(target), require_full_window_(require_full_window) {}

bool TargetTracker::update(const ReturnWindow& window, double elapsed_s) {
  if (final_time_.has_value()) {
    return false;
  }
  if (window.size() == 0) {
    return false;
  }
  if (require_full_window_ && !window.full()) {
    return false;
  }
  if (window.mean() >= target_) {
    final_time_ = elapsed_s;
    return true;
  }
  return false;
}

MetricsLogger::MetricsLogger(const std::string& path) {
  if (!path.empty()) {
    auto* f = new std::ofstream(path, std::ios::trunc);
    if (!f->is_open()) {
      delete f;
      throw std::runtime_error("MetricsLogger: cannot open " + path);
    }
    out_ = f;
    owns_stream_ = true;
  }
  start_ns_ = now_ns();
}

MetricsLogger::MetricsLogger(std::ostream& out) : out_(&out) {
  start_ns_ = now_ns();
}

MetricsLogger::~MetricsLogger() {
  if (owns_stream_) {
    delete out_;
  }
}

double MetricsLogger::stamp() {
  double t = static_cast<double>(now_ns() - start_ns_) * 1e-9;
  // Guarantee strict monotonicity even for back-to-back rows.
  if (t <= last_t_) {
    t = std::nextafter(last_t_, std::numeric_limits<double>::infinity());
  }
  last_t_ = t;
  return t;
}

void MetricsLogger::write_row(nlohmann::json row) {
  if (out_ == nullptr) {
    return;
  }
  row["t"] = stamp();
  (*out_) << row.dump() << '\n';
  out_->flush();
}

void MetricsLogger::write_snapshot(const Snapshot& s) {
  write_row(nlohmann::json{
      {"type", "throughput"},
      {"elapsed_s", s.t_s},
      {"sample_count", s.sample_count},
      {"receive_count", s.receive_count},
      {"train_count", s.train_count},
      {"sample_rate", s.sample_rate},
      {"receive_rate", s.receive_rate},
      {"train_rate", s.train_rate},
      {"episodes", s.episodes},
      {"window_mean", s.window_mean},
      {"versions_published", s.versions_published},
  });
}

void MetricsLogger::write_episode(std::uint64_t index, double episode_return,
                                  std::uint64_t steps, double wall_s,
                                  std::uint64_t policy_version,
                                  std::int64_t group) {
  write_row(nlohmann::json{
      {"type", "episode"},
      {"group", group},
      {"episode", index},
      {"return", episode_return},
      {"steps", steps},
      {"wall_s", wall_s},
      {"policy_version", policy_version},
  });
}

}  // namespace pushrl::telemetry
