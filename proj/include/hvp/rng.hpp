#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace hvp {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the i-th independent stream below a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i) {
    return mix64(mix64(master) ^ mix64(i ^ 0x5851f42d4c957f2dULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i, std::uint64_t j) {
    return derive_seed(derive_seed(master, i), j);
}

/// Counter-based generator: the n-th output is a pure function of (key, n), so
/// streams can be split by key and replayed from any position.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t key = 0, std::uint64_t counter = 0) : key_(mix64(key)), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        return mix64(key_ ^ (0x9e3779b97f4a7c15ULL * ++counter_));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        std::poisson_distribution<std::uint64_t> d(mean);
        return d(*this);
    }

    constexpr std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace hvp
