#include "pushrl/replay/buffer.hpp"

#include <stdexcept>

namespace pushrl {

double staleness(size_t batch_size, size_t capacity) {
    if (batch_size == 0 || batch_size > capacity) {
        throw std::invalid_argument(
            "staleness: need 0 < batch_size <= capacity, got " +
            std::to_string(batch_size) + "/" + std::to_string(capacity));
    }
    return static_cast<double>(batch_size) / static_cast<double>(capacity);
}

ReplayBuffer::ReplayBuffer(size_t capacity, size_t warmup_size,
                           size_t batch_size)
    : capacity_(capacity), warmup_(warmup_size), batch_size_(batch_size) {
    if (capacity == 0) {
        throw std::invalid_argument("replay: capacity must be positive");
    }
    if (batch_size == 0 || batch_size > capacity) {
        throw std::invalid_argument("replay: need 0 < batch_size <= capacity");
    }
    entries_.reserve(capacity);
}

size_t ReplayBuffer::push(const std::vector<Transition>& traj) {
    for (const Transition& tr : traj) {
        if (entries_.size() < capacity_) {
            entries_.push_back({tr, next_insertion_index_});
        } else {
            // Full: overwrite the oldest slot.
            entries_[head_] = {tr, next_insertion_index_};
            head_ = (head_ + 1) % capacity_;
        }
        ++next_insertion_index_;
        ++inserted_total_;
    }
    return traj.size();
}

std::optional<std::vector<Transition>> ReplayBuffer::sample(size_t batch_size,
                                                            Rng& rng) {
    if (entries_.size() < warmup_ || entries_.empty()) {
        return std::nullopt;
    }
    std::vector<Transition> batch;
    batch.reserve(batch_size);
    for (size_t i = 0; i < batch_size; ++i) {
        batch.push_back(entries_[rng.bounded(entries_.size())].tr);
    }
    consumed_total_ += batch_size;
    return batch;
}

StalenessReport ReplayBuffer::staleness_report(uint64_t learner_version) const {
    StalenessReport report;
    report.configured_P = staleness(batch_size_, capacity_);
    if (entries_.empty()) return report;
    double total_lag = 0.0;
    for (const Entry& e : entries_) {
        const uint64_t lag = learner_version >= e.tr.policy_version
                                 ? learner_version - e.tr.policy_version
                                 : 0;
        ++report.version_lag_histogram[lag];
        total_lag += static_cast<double>(lag);
    }
    report.realized_mean_age = total_lag / static_cast<double>(entries_.size());
    return report;
}

const Transition& ReplayBuffer::at(size_t i) const {
    if (i >= entries_.size()) {
        throw std::out_of_range("replay: index out of range");
    }
    return entries_[(head_ + i) % entries_.size()].tr;
}

uint64_t ReplayBuffer::insertion_index_at(size_t i) const {
    if (i >= entries_.size()) {
        throw std::out_of_range("replay: index out of range");
    }
    return entries_[(head_ + i) % entries_.size()].insertion_index;
}

}  // namespace pushrl
