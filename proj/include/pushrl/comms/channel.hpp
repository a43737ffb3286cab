#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>

#include "pushrl/comms/envelope.hpp"

namespace pushrl {

enum class ProbeStatus {
    message,  // out was filled
    empty,    // nothing ready right now
    closed,   // all senders finished and everything was drained
};

struct ChannelStats {
    uint64_t sent_count = 0;
    uint64_t received_count = 0;
    uint64_t dropped_stale_count = 0;
    uint64_t bytes_sent = 0;
    int64_t send_busy_ns = 0;  // accumulated time inside send()
    int64_t recv_busy_ns = 0;  // time inside probes that delivered a message
                               // or pulled bytes toward one (service time;
                               // idle misses are excluded)
    size_t in_flight = 0;
};

struct ChannelClosedError : std::runtime_error {
    ChannelClosedError() : std::runtime_error("channel closed") {}
};

// Transport-agnostic worker-facing views.  Workers push without waiting for
// the consumer and poll without blocking; which wire sits underneath
// (in-process queue or loopback TCP) is a construction-time choice.
class MsgSender {
public:
    virtual ~MsgSender() = default;
    virtual void send(const Envelope& e) = 0;
    virtual void close() = 0;  // idempotent; signals end-of-stream
    virtual ChannelStats stats() const = 0;
};

class MsgReceiver {
public:
    virtual ~MsgReceiver() = default;
    virtual ProbeStatus probe(Envelope& out) = 0;
    virtual ChannelStats stats() const = 0;
};

// Bounded multi-producer single-consumer queue of envelopes.  send() returns
// as soon as the message is enqueued — the sender never waits for the
// consumer to process anything — but blocks while the queue is at depth,
// which is the backpressure that keeps memory bounded and makes a slow
// consumer visible to the rate controller.
//
// Wiring rule: create every sender view before the consumer starts
// draining.  End-of-stream is "all registered senders finished"; a consumer
// racing ahead of sender registration would see a spurious close.
class Channel {
public:
    explicit Channel(size_t depth = 1024);

    void add_sender();
    void sender_done();

    void send(const Envelope& e);
    ProbeStatus probe(Envelope& out);

    // Force-close: pending messages are still drainable, further sends
    // throw ChannelClosedError, blocked senders wake up.
    void close();

    ChannelStats stats() const;
    size_t depth() const { return depth_; }

private:
    const size_t depth_;
    mutable std::mutex mutex_;
    std::condition_variable not_full_;
    std::deque<Envelope> queue_;
    size_t senders_ = 0;
    bool force_closed_ = false;
    ChannelStats stats_{};
};

// Sender/receiver views over a shared in-process channel.
class InProcSender final : public MsgSender {
public:
    explicit InProcSender(std::shared_ptr<Channel> ch);
    ~InProcSender() override;
    void send(const Envelope& e) override;
    void close() override;
    ChannelStats stats() const override;

private:
    std::shared_ptr<Channel> ch_;
    bool closed_ = false;
};

class InProcReceiver final : public MsgReceiver {
public:
    explicit InProcReceiver(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}
    ProbeStatus probe(Envelope& out) override { return ch_->probe(out); }
    ChannelStats stats() const override { return ch_->stats(); }

private:
    std::shared_ptr<Channel> ch_;
};

// Newest-wins parameter slot.  Publishers overwrite freely; each subscriber
// sees a strictly increasing version sequence, and every snapshot that was
// superseded before delivery is counted, never delivered.
class ParamSub {
public:
    void publish(ParamSet ps);
    std::optional<ParamSet> latest();

    uint64_t published_count() const;
    uint64_t delivered_count() const;
    uint64_t dropped_stale_count() const;

private:
    mutable std::mutex mutex_;
    std::optional<ParamSet> slot_;
    std::optional<uint64_t> last_delivered_;
    uint64_t published_ = 0;
    uint64_t delivered_ = 0;
    uint64_t dropped_ = 0;
};

}  // namespace pushrl
