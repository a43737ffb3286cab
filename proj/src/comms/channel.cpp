#include "pushrl/comms/channel.hpp"

#include "pushrl/util/time.hpp"

namespace pushrl {

Channel::Channel(size_t depth) : depth_(depth == 0 ? 1 : depth) {}

void Channel::add_sender() {
    std::lock_guard<std::mutex> lock(mutex_);
    ++senders_;
}

void Channel::sender_done() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (senders_ > 0) --senders_;
}

void Channel::send(const Envelope& e) {
    const int64_t t0 = now_ns();
    std::unique_lock<std::mutex> lock(mutex_);
    not_full_.wait(lock, [&] {
        return force_closed_ || queue_.size() < depth_;
    });
    if (force_closed_) {
        throw ChannelClosedError();
    }
    queue_.push_back(e);
    ++stats_.sent_count;
    stats_.bytes_sent += frame_size(e.payload.size());
    stats_.send_busy_ns += now_ns() - t0;
}

ProbeStatus Channel::probe(Envelope& out) {
    const int64_t t0 = now_ns();
    std::lock_guard<std::mutex> lock(mutex_);
    if (queue_.empty()) {
        return (senders_ == 0 || force_closed_) ? ProbeStatus::closed
                                                : ProbeStatus::empty;
    }
    out = std::move(queue_.front());
    queue_.pop_front();
    ++stats_.received_count;
    stats_.recv_busy_ns += now_ns() - t0;
    not_full_.notify_one();
    return ProbeStatus::message;
}

void Channel::close() {
    std::lock_guard<std::mutex> lock(mutex_);
    force_closed_ = true;
    not_full_.notify_all();
}

ChannelStats Channel::stats() const {
    std::lock_guard<std::mutex> lock(mutex_);
    ChannelStats s = stats_;
    s.in_flight = queue_.size();
    return s;
}

InProcSender::InProcSender(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {
    ch_->add_sender();
}

InProcSender::~InProcSender() {
    close();
}

void InProcSender::send(const Envelope& e) {
    ch_->send(e);
}

void InProcSender::close() {
    if (!closed_) {
        closed_ = true;
        ch_->sender_done();
    }
}

ChannelStats InProcSender::stats() const {
    return ch_->stats();
}

void ParamSub::publish(ParamSet ps) {
    std::lock_guard<std::mutex> lock(mutex_);
    ++published_;
    const bool behind_delivered =
        last_delivered_.has_value() && ps.version <= *last_delivered_;
    const bool behind_pending =
        slot_.has_value() && ps.version <= slot_->version;
    if (behind_delivered || behind_pending) {
        ++dropped_;  // already superseded on arrival
        return;
    }
    if (slot_.has_value()) {
        ++dropped_;  // pending snapshot superseded before anyone saw it
    }
    slot_ = std::move(ps);
}

std::optional<ParamSet> ParamSub::latest() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!slot_.has_value()) {
        return std::nullopt;
    }
    std::optional<ParamSet> out;
    slot_.swap(out);
    last_delivered_ = out->version;
    ++delivered_;
    return out;
}

uint64_t ParamSub::published_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return published_;
}

uint64_t ParamSub::delivered_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return delivered_;
}

uint64_t ParamSub::dropped_stale_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return dropped_;
}

}  // namespace pushrl
