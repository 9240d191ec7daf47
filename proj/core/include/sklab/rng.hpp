#pragma once

#include <cstdint>

namespace sklab {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive combination of two 64-bit words.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

/// Uniform in the open interval (0, 1) from the top 52 bits (midpoint grid).
double uniform_open(std::uint64_t bits);

/// Standard normal quantile (Wichura AS241, about 1e-16 relative accuracy).
double normal_quantile(double p);

/// Seed of replicate r, derived from a base seed.
inline std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t r) {
  return hash_combine(base_seed, r);
}

/// Counter-based stream: draw k is a pure function of (seed, k).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_bits() { return hash_combine(seed_, counter_++); }
  double uniform() { return uniform_open(next_bits()); }
  double normal() { return normal_quantile(uniform()); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace sklab
