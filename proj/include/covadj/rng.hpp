#pragma once

#include <cstdint>
#include <vector>

#include "covadj/math.hpp"

namespace covadj {

// SplitMix64 (Steele, Lea & Flood). Used only to expand seeds.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ (Blackman & Vigna) with hand-rolled distributions so that a
// (seed, draw-sequence) pair produces the same stream on every platform.
// Replication streams are derived from (master_seed, replication_index),
// which makes parallel runs independent of scheduling.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    static Rng for_replication(std::uint64_t master_seed, std::uint64_t replication_index) {
        return Rng(master_seed + 0x9E3779B97F4A7C15ull * (replication_index + 1));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0,1): 53 random bits centered in the unit cell.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal via the inverse CDF (monotone in the uniform draw).
    double normal() { return norm_quantile(uniform01()); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    // Fisher-Yates, descending index.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace covadj
