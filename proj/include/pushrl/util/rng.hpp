#pragma once

#include <cstdint>

namespace pushrl {

// xoshiro256** with splitmix64 seeding.  We carry our own generator instead
// of <random> so that streams are bit-identical across platforms and standard
// library versions; reproducibility of seeded runs is part of the contract.
class Rng {
public:
    explicit Rng(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : s_) word = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 24 bits of randomness (exact float arithmetic).
    float uniform_f32() {
        return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
    }

    float uniform_f32(float lo, float hi) {
        return lo + (hi - lo) * uniform_f32();
    }

    // Uniform in [0, 1), 53 bits.
    double uniform_f64() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).  Lemire multiply-shift; slight modulo bias
    // of < 2^-64 is irrelevant for our range sizes and keeps it branch-free.
    uint64_t bounded(uint64_t n) {
        const auto wide = static_cast<__uint128_t>(next_u64()) * n;
        return static_cast<uint64_t>(wide >> 64);
    }

    // Independent generator for a numbered child stream (per-worker RNGs).
    Rng derive(uint64_t stream) const {
        uint64_t x = s_[0] ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        return Rng(splitmix64(x));
    }

    static uint64_t splitmix64(uint64_t& state) {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t s_[4];
};

}  // namespace pushrl
