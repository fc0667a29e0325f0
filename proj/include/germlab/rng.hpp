#pragma once

// Deterministic seeded RNG for reproducible Monte Carlo runs.
//
// All generators are pure 64-bit integer arithmetic (splitmix64 seeding,
// xoshiro256++ core, explicit Box-Muller), so a given seed produces the
// same stream on every platform and compiler; std::random distributions
// are deliberately avoided. Parallel work derives per-item substreams
// from (seed, item index), which makes results independent of the thread
// count.

#include <cmath>
#include <cstdint>
#include <span>

namespace germlab {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stable mix of a base seed and a stream index.
inline uint64_t substream_seed(uint64_t seed, uint64_t index) {
    uint64_t s = seed ^ (0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull);
    (void)splitmix64(s);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed = 1) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        have_gauss_ = false;
    }

    // xoshiro256++ next
    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 significant bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Integer in [0, n), n > 0.
    uint64_t below(uint64_t n) {
        // multiply-shift; bias is negligible for n << 2^64
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double gaussian() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_spare_;
        }
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        gauss_spare_ = r * std::sin(a);
        have_gauss_ = true;
        return r * std::cos(a);
    }

    // Uniform direction on the unit sphere of R^dim.
    void unit_vector(std::span<double> out) {
        while (true) {
            double n2 = 0.0;
            for (auto& x : out) {
                x = gaussian();
                n2 += x * x;
            }
            if (n2 > 1e-24) {
                const double inv = 1.0 / std::sqrt(n2);
                for (auto& x : out) x *= inv;
                return;
            }
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4] = {};
    bool have_gauss_ = false;
    double gauss_spare_ = 0.0;
};

}  // namespace germlab
