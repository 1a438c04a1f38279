#pragma once

#include <cmath>
#include <cstdint>

namespace gt {

// SplitMix64: one word of state, portable across platforms and compilers.
// All randomness in the library flows through this engine so that a given
// seed reproduces bit-identical results everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1]; safe as a log() argument.
    double next_double_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0,n), n >= 1.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

/// Stream `counter` of a master seed: master XOR counter pushed through the
/// SplitMix64 finalizer. Distinct counters give statistically independent
/// streams, so concurrent consumers never share RNG state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
    std::uint64_t z = (master ^ counter) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Number of failures before the next success of a Bernoulli(p) scan,
/// sampled geometrically. `log_q` is log(1-p), must be < 0.
inline std::uint64_t geometric_skip(Rng& rng, double log_q) {
    const double g = std::log(rng.next_double_pos()) / log_q;
    if (g >= 9.2e18) return ~std::uint64_t{0};
    return static_cast<std::uint64_t>(g);
}

} // namespace gt
