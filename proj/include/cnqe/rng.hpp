// Counter-based splittable PRNG. Every stochastic site in the pipeline draws
// from a named substream derived from the experiment seed, so results are
// bit-reproducible across platforms and independent of evaluation order.

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cnqe::rng {

namespace detail {

// SplitMix64 output function applied to a counter.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

class Stream {
public:
    explicit Stream(uint64_t seed) : key_(detail::mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    // Derived stream for a named stochastic site. Forking never disturbs the
    // parent's counter, so adding a new site does not shift existing draws.
    Stream fork(std::string_view label) const {
        Stream s(0);
        s.key_ = detail::mix64(key_ ^ detail::fnv1a(label));
        s.counter_ = 0;
        return s;
    }

    Stream fork(std::string_view label, uint64_t index) const {
        Stream s = fork(label);
        s.key_ = detail::mix64(s.key_ ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        return s;
    }

    uint64_t next_u64() { return detail::mix64(key_ ^ counter_++); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n) via 128-bit multiply rejection (Lemire).
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        while (true) {
            const uint64_t x = next_u64();
            const __uint128_t m = static_cast<__uint128_t>(x) * n;
            const uint64_t lo = static_cast<uint64_t>(m);
            if (lo >= n || lo >= static_cast<uint64_t>(-static_cast<int64_t>(n)) % n)
                return static_cast<uint64_t>(m >> 64);
        }
    }

    // Standard normal via Box-Muller; draws two uniforms per value so the
    // stream position is input-independent.
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t key_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace cnqe::rng
