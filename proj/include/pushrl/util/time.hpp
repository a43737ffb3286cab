#pragma once

#include <chrono>
#include <cstdint>
#include <thread>

namespace pushrl {

inline int64_t now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline int64_t now_unix_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

inline double seconds_since(int64_t t0_ns) {
    return static_cast<double>(now_ns() - t0_ns) * 1e-9;
}

// Sleep that lands close to the requested duration: coarse sleep for the
// bulk, then spin for the tail.  Plain sleep_for oversleeps by the scheduler
// quantum, which is fatal when we are pacing sub-millisecond send intervals.
inline void precise_sleep_ns(int64_t ns) {
    if (ns <= 0) return;
    const int64_t deadline = now_ns() + ns;
    constexpr int64_t spin_margin = 150'000;  // leave ~150us for spinning
    if (ns > spin_margin) {
        std::this_thread::sleep_for(std::chrono::nanoseconds(ns - spin_margin));
    }
    while (now_ns() < deadline) {
        // busy wait
    }
}

}  // namespace pushrl
