#pragma once

#include <cstdint>
#include <random>

namespace whamkit {

// Seeded generator used by every stochastic routine. Streams for independent
// purposes are derived with derive_seed so that adding a draw in one place
// does not shift the numbers drawn elsewhere.
using Rng = std::mt19937_64;

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double normal(Rng& rng, double mean, double stddev) {
  if (stddev == 0.0) return mean;
  std::normal_distribution<double> dist(mean, stddev);
  return dist(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  std::bernoulli_distribution dist(p);
  return dist(rng);
}

}  // namespace whamkit
