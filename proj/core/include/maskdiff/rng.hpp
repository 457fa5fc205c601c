#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace maskdiff {

// Deterministic random source. Every sampling routine in the project draws
// through this class: mt19937_64 is bit-exact across platforms, and the
// transforms below avoid the implementation-defined std:: distributions, so
// identical seeds reproduce identical runs everywhere.
class Rng {
  public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // uniform in [0, 1) with 53-bit resolution
    double uniform();

    bool bernoulli(double p);

    // uniform integer in [0, n), n >= 1
    int below(int n);

    // index sampled proportionally to probs (rescaled by their sum)
    int categorical(std::span<const double> probs);

    double normal(double mean = 0.0, double stddev = 1.0);

    // Child stream derived from the construction seed and a stream id.
    // Independent of how many draws the parent has already consumed.
    Rng split(uint64_t stream) const;

    uint64_t seed() const { return seed_; }

  private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

// splitmix64 finalizer, used for seed derivation and config hashing
uint64_t mix64(uint64_t x);

}  // namespace maskdiff
