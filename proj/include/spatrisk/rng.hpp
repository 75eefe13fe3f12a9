#pragma once

#include <cmath>
#include <cstdint>

namespace spatrisk {

namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace rng_detail

/// xoshiro256++ seeded through SplitMix64, with a splittable stream
/// constructor so replicate i of a run draws from (seed, i) independently
/// of scheduling. Distributions are hand-rolled so that outputs are
/// reproducible for a given libm.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = rng_detail::splitmix64(sm);
    }

    /// Independent stream for one work item of a seeded run.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t sm = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        Rng r(rng_detail::splitmix64(sm));
        return r;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rng_detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rng_detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform()); }

    /// Standard Frechet: P(Z <= z) = exp(-1/z).
    double frechet() { return 1.0 / exponential(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(2.0 * exponential());
        const double a = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace spatrisk
