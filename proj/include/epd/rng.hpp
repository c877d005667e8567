#pragma once

// Deterministic, splittable random source. Every stochastic routine in the
// library takes an explicit Rng (or a pre-drawn noise tensor), so results are
// reproducible under a fixed seed regardless of worker count or call order.

#include <cstdint>
#include <cmath>

namespace epd {

namespace detail {

inline uint64_t splitmix64(uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(s);
}

}  // namespace detail

class Rng {
public:
    Rng() : state_(0x853c49e6748fea9bULL) {}
    explicit Rng(uint64_t seed) : state_(detail::mix(seed, 0x2545f4914f6cdd1dULL)) {}

    // Independent stream derived from this generator's seed material without
    // advancing it. fork(i) and fork(j) are decorrelated for i != j, which is
    // what makes per-sample / per-step noise reproducible under batching.
    Rng fork(uint64_t stream) const {
        Rng r;
        r.state_ = detail::mix(state_, stream);
        return r;
    }

    uint64_t next_u64() { return detail::splitmix64(state_); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // Standard normal via Box-Muller. No cached spare: each call consumes
    // exactly two uniforms, keeping forked streams byte-for-byte stable.
    double normal() {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    uint64_t state_;
};

}  // namespace epd
