#ifndef WHITEHEAD_RNG_HPP
#define WHITEHEAD_RNG_HPP

#include <cstdint>

namespace whitehead {

/// Small deterministic generator (splitmix64). Every randomized artifact in
/// the kit is a pure function of its 64-bit seed, independent of platform
/// and standard-library distribution details.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    /// Uniform double in [0, 1).
    double real() { return (next() >> 11) * 0x1.0p-53; }

    /// Independent stream derived from this one (for per-task seeding).
    Rng split() { return Rng(next()); }

private:
    std::uint64_t state_;
};

} // namespace whitehead

#endif
