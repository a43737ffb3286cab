#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pushrl/core/types.hpp"
#include "pushrl/util/rng.hpp"

namespace pushrl {

struct StalenessReport {
    double configured_P = 0.0;       // batch_size / capacity, exact
    double realized_mean_age = 0.0;  // mean version lag of current contents
    std::map<uint64_t, size_t> version_lag_histogram;
};

// P = B_s / N_s: the fraction of the buffer replaced between consecutive
// samples of the same slot, i.e. how fresh sampled experience is.  P = 1
// means every sampled batch is drawn from data produced since the last
// batch ("New"); P = 0.5 means half old, half new ("Lag2").
double staleness(size_t batch_size, size_t capacity);

// FIFO ring of transitions with uniform with-replacement sampling.  Owned
// exclusively by the buffer worker; no internal locking.
class ReplayBuffer {
public:
    ReplayBuffer(size_t capacity, size_t warmup_size, size_t batch_size);

    // Appends a trajectory, evicting oldest entries beyond capacity.
    // Returns the number inserted (always the trajectory length).
    size_t push(const std::vector<Transition>& traj);

    // Uniform sample with replacement.  Returns nothing while the buffer
    // holds fewer than warmup_size entries (the learner skips and retries).
    std::optional<std::vector<Transition>> sample(size_t batch_size, Rng& rng);

    StalenessReport staleness_report(uint64_t learner_version) const;

    size_t size() const { return entries_.size(); }
    size_t capacity() const { return capacity_; }
    size_t warmup_size() const { return warmup_; }
    uint64_t inserted_total() const { return inserted_total_; }
    uint64_t consumed_total() const { return consumed_total_; }

    // Oldest-first access for inspection and tests.
    const Transition& at(size_t i) const;
    uint64_t insertion_index_at(size_t i) const;

private:
    struct Entry {
        Transition tr;
        uint64_t insertion_index;
    };

    size_t capacity_;
    size_t warmup_;
    size_t batch_size_;
    std::vector<Entry> entries_;  // ring; head_ is the oldest
    size_t head_ = 0;
    uint64_t next_insertion_index_ = 0;
    uint64_t inserted_total_ = 0;
    uint64_t consumed_total_ = 0;
};

}  // namespace pushrl
