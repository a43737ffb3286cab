#include "pushrl/bench/commbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <latch>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pushrl/comms/channel.hpp"
#include "pushrl/comms/tcp.hpp"
#include "pushrl/util/time.hpp"

namespace pushrl::bench {
namespace {

// Sender side: one message per simulated sample.  Pacing uses an absolute
// schedule so the scheduler's constant wake-up latency does not accumulate
// into the effective sample time; a stall (blocked send) resets the schedule
// instead of causing a burst.
void sender_loop(MsgSender& tx, std::uint32_t id, std::int64_t period_ns,
                 const std::vector<std::uint8_t>& payload,
                 const std::atomic<bool>& stop, std::latch& start) {
  Envelope e;
  e.kind = MsgKind::trajectory;
  e.sender_id = id;
  e.payload = payload;
  start.wait();
  std::int64_t next_ns = now_ns() + period_ns;
  try {
    while (!stop.load(std::memory_order_relaxed)) {
      if (period_ns > 0) {
        const std::int64_t gap = next_ns - now_ns();
        if (gap > 0) {
          std::this_thread::sleep_for(std::chrono::nanoseconds(gap));
        }
      }
      ++e.version;
      tx.send(e);
      next_ns += period_ns;
      const std::int64_t now = now_ns();
      if (now > next_ns) next_ns = now;  // fell behind: no catch-up burst
    }
  } catch (const ChannelClosedError&) {
    // Receiver tore the channel down; treat as a stop signal.
  }
  tx.close();
}

double safe_mean_s(std::int64_t busy_ns, std::uint64_t count) {
  if (count == 0) return 1e-9;
  return std::max(1e-9, static_cast<double>(busy_ns) / 1e9 /
                            static_cast<double>(count));
}

}  // namespace

CommbenchResult run_commbench(const config::RunConfig& cfg) {
  config::validate(cfg);
  const auto& d = cfg.distribution;
  const auto& cb = cfg.commbench;
  const std::size_t n = static_cast<std::size_t>(d.n_actors);

  CommbenchResult r;
  r.n_actors = d.n_actors;
  r.message_bytes = cb.message_bytes;
  r.n_samples = cb.n_samples;
  r.queue_depth = d.queue_depth;
  r.transport = d.transport;
  r.sample_time_s = cb.sample_time_s;
  r.receive_time_s = cb.receive_time_s;

  std::vector<std::uint8_t> payload(static_cast<std::size_t>(cb.message_bytes));
  for (std::size_t i = 0; i < payload.size(); ++i) {
    payload[i] = static_cast<std::uint8_t>(i * 131u + 17u);
  }
  const std::int64_t period_ns =
      static_cast<std::int64_t>(std::llround(cb.sample_time_s * 1e9));
  const std::int64_t receive_ns =
      static_cast<std::int64_t>(std::llround(cb.receive_time_s * 1e9));

  std::atomic<bool> stop{false};
  std::latch start(1);

  // Wire the transport: all sender endpoints must exist before the receiver
  // starts draining.
  std::shared_ptr<Channel> channel;
  std::unique_ptr<TcpReceiver> tcp_rx;
  std::unique_ptr<InProcReceiver> inproc_rx;
  std::vector<std::unique_ptr<MsgSender>> senders;
  MsgReceiver* rx = nullptr;
  if (d.transport == config::Transport::inproc) {
    channel = std::make_shared<Channel>(static_cast<std::size_t>(d.queue_depth));
    for (std::size_t i = 0; i < n; ++i) {
      senders.push_back(std::make_unique<InProcSender>(channel));
    }
    inproc_rx = std::make_unique<InProcReceiver>(channel);
    rx = inproc_rx.get();
  } else {
    tcp_rx = std::make_unique<TcpReceiver>(
        static_cast<std::uint16_t>(d.tcp_port_base));
    for (std::size_t i = 0; i < n; ++i) {
      senders.push_back(std::make_unique<TcpSender>(tcp_rx->port()));
    }
    tcp_rx->accept_senders(n);
    rx = tcp_rx.get();
  }

  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back(sender_loop, std::ref(*senders[i]),
                         static_cast<std::uint32_t>(i), period_ns,
                         std::cref(payload), std::cref(stop), std::ref(start));
  }

  const std::int64_t t0 = now_ns();
  start.count_down();

  std::uint64_t received = 0;
  double collect_s = 0.0;
  Envelope e;
  for (;;) {
    const ProbeStatus st = rx->probe(e);
    if (st == ProbeStatus::closed) break;
    if (st == ProbeStatus::empty) {
      if (stop.load(std::memory_order_relaxed)) continue;  // draining
      std::this_thread::sleep_for(std::chrono::microseconds(30));
      continue;
    }
    ++received;
    if (received <= static_cast<std::uint64_t>(cb.n_samples)) {
      if (receive_ns > 0) precise_sleep_ns(receive_ns);
      if (received == static_cast<std::uint64_t>(cb.n_samples)) {
        collect_s = seconds_since(t0);
        stop.store(true, std::memory_order_relaxed);
      }
    }
  }
  for (auto& th : threads) th.join();

  if (received < static_cast<std::uint64_t>(cb.n_samples)) {
    throw std::runtime_error(
        "commbench: transport closed after " + std::to_string(received) +
        " of " + std::to_string(cb.n_samples) + " samples");
  }

  // Cost accounting. The in-process channel keeps one stats block for both
  // sides; TCP senders each keep their own.
  std::int64_t send_busy_ns = 0;
  std::uint64_t sent = 0;
  std::int64_t recv_busy_ns = 0;
  if (d.transport == config::Transport::inproc) {
    const ChannelStats s = rx->stats();
    send_busy_ns = s.send_busy_ns;
    sent = s.sent_count;
    recv_busy_ns = s.recv_busy_ns;
  } else {
    for (const auto& tx : senders) {
      const ChannelStats s = tx->stats();
      send_busy_ns += s.send_busy_ns;
      sent += s.sent_count;
    }
    recv_busy_ns = rx->stats().recv_busy_ns;
  }
  r.sent_total = sent;
  r.received_total = received;
  r.measured_t_sd = safe_mean_s(send_busy_ns, sent);
  r.measured_t_rv = safe_mean_s(recv_busy_ns, received) + cb.receive_time_s;
  r.collect_time_s = collect_s;
  r.receive_rate = static_cast<double>(cb.n_samples) / collect_s;
  r.throughput_mb_s = static_cast<double>(cb.n_samples) *
                      static_cast<double>(cb.message_bytes) / collect_s / 1e6;

  const strategy::CollectTime ct = strategy::collect_time(
      std::max(cb.sample_time_s, 1e-9), r.measured_t_sd, r.measured_t_rv,
      r.n_actors, r.n_samples);
  r.predicted_s = ct.seconds;
  r.predicted_bottleneck = ct.bottleneck;
  return r;
}

SweepPrediction predict_from_sweep(const std::vector<CommbenchResult>& points) {
  if (points.empty()) {
    throw std::invalid_argument("predict_from_sweep: no points");
  }
  SweepPrediction sp;
  sp.t_sp = std::max(points.front().sample_time_s, 1e-9);
  sp.t_sd = points.front().measured_t_sd;
  sp.t_rv = points.front().measured_t_rv;
  for (const auto& p : points) {
    sp.t_sd = std::min(sp.t_sd, p.measured_t_sd);
    sp.t_rv = std::max(sp.t_rv, p.measured_t_rv);
  }
  sp.switch_ratio = (sp.t_sp + sp.t_sd) / sp.t_rv;
  sp.first_receiver_bound_n =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                    std::ceil(sp.switch_ratio - 1e-12)));
  sp.predicted_s.reserve(points.size());
  for (const auto& p : points) {
    sp.predicted_s.push_back(
        strategy::collect_time(sp.t_sp, sp.t_sd, sp.t_rv, p.n_actors,
                               p.n_samples)
            .seconds);
  }
  return sp;
}

std::string format_result(const CommbenchResult& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "commbench: transport=" << config::transport_name(r.transport)
     << " n_actors=" << r.n_actors << " message=" << r.message_bytes
     << "B queue=" << r.queue_depth << "\n";
  os << "  samples collected   " << r.n_samples << " (sent " << r.sent_total
     << ", drained " << r.received_total << ")\n";
  os << "  collect time        " << r.collect_time_s << " s  (predicted "
     << r.predicted_s << " s, "
     << strategy::bottleneck_name(r.predicted_bottleneck) << ")\n";
  os << "  receive rate        " << r.receive_rate << " samples/s\n";
  os << "  payload throughput  " << r.throughput_mb_s << " MB/s\n";
  os.precision(4);
  os << "  t_sp configured     " << r.sample_time_s * 1e3 << " ms\n";
  os << "  t_rv extra service  " << r.receive_time_s * 1e3 << " ms\n";
  os << "  t_sd measured       " << r.measured_t_sd * 1e3 << " ms/message\n";
  os << "  t_rv measured       " << r.measured_t_rv * 1e3 << " ms/message\n";
  return os.str();
}

}  // namespace pushrl::bench
