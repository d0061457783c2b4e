#ifndef NAE_RNG_HPP
#define NAE_RNG_HPP

#include <array>
#include <cstdint>

#include "nae/matrix.hpp"

namespace nae {

/// Counter-based random number generator (Philox4x32-10).
///
/// Identical seed + identical call sequence gives an identical stream.
/// Because the state is a (key, counter) pair, independent substreams can
/// be split off by mixing a salt into the key: per-example noise streams
/// stay reproducible no matter how minibatches are ordered.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream derived from this generator's key and `salt`.
    /// Splitting does not advance or disturb the parent stream.
    Rng split(std::uint64_t salt) const;

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double next_double();

    /// Standard normal via Box-Muller (second value cached).
    double gaussian();

    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);

    std::uint64_t seed() const { return seed_; }

private:
    void refill();

    std::uint64_t seed_;
    std::array<std::uint32_t, 2> key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// n i.i.d. Gaussian draws with the given mean and variance (var = 0 gives
/// the constant mean). Negative variance throws std::invalid_argument.
Vector sample_gaussian(Rng &rng, double mean, double var, std::size_t n);

/// n i.i.d. {0,1} draws with inclusion probability p.
/// p outside [0,1] throws std::invalid_argument.
Vector sample_bernoulli(Rng &rng, double p, std::size_t n);

}  // namespace nae

#endif
