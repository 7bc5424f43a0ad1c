#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace nadsim {

// Deterministic seedable generator (xoshiro256** with splitmix64 seeding).
// Every stochastic site in a simulation draws from its own sub-stream derived
// from (seed, site name), so results do not depend on event interleaving.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    // Sub-stream for a named site.
    static Rng substream(uint64_t seed, std::string_view site) {
        return Rng(splitmix_combine(seed, fnv1a64(site)));
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

    // Unbiased integer in [0, bound) via Lemire's method.
    uint64_t next_below(uint64_t bound) {
        if (bound <= 1) return 0;
        unsigned __int128 m = (unsigned __int128)next_u64() * bound;
        uint64_t lo = (uint64_t)m;
        if (lo < bound) {
            uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = (unsigned __int128)next_u64() * bound;
                lo = (uint64_t)m;
            }
        }
        return (uint64_t)(m >> 64);
    }

    // Uniform in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi] inclusive.
    int64_t uniform_i64(int64_t lo, int64_t hi) {
        return lo + (int64_t)next_below((uint64_t)(hi - lo) + 1);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double exponential(double mean) {
        double u;
        do { u = next_double(); } while (u <= 0.0);
        return -mean * std::log(u);
    }

    static uint64_t fnv1a64(std::string_view s) {
        uint64_t h = 1469598103934665603ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static uint64_t splitmix_combine(uint64_t seed, uint64_t salt) {
        uint64_t x = seed ^ (salt + 0x9e3779b97f4a7c15ull);
        return splitmix64(x);
    }

    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t s_[4];
};

}  // namespace nadsim
