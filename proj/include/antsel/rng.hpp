#pragma once

#include <cstdint>
#include <random>

namespace antsel {

/// Seedable random source used by every stochastic operation in this library.
///
/// The raw bit stream comes from std::mt19937_64, whose output sequence is
/// fixed by the C++ standard. Uniform and Gaussian variates are derived here
/// instead of through std:: distributions (whose algorithms are
/// implementation-defined), so a given seed produces the same draws on every
/// platform and standard library:
///   - uniform_real: top 53 bits of one engine word, value in [0, 1)
///   - uniform_index: rejection sampling on engine words, unbiased
///   - gaussian: Box-Muller transform, the second deviate is cached
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Next raw engine word.
    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform_real();

    /// Uniform integer in [0, n). n must be nonzero.
    std::size_t uniform_index(std::size_t n);

    /// Standard normal deviate (mean 0, variance 1).
    double gaussian();

    /// Independent child stream for the given index. Children with distinct
    /// indices are statistically independent of each other and of the parent.
    Rng fork(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

    /// SplitMix64 finalizer over (seed, stream); the basis of fork().
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

}  // namespace antsel
