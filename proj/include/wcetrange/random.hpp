#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wcetrange {

using Rng = std::mt19937_64;

/// Independent generator keyed by a master seed and a path of indices, e.g.
/// (seed, refinement, solution, sample). Same key, same stream.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> key = {});

/// First output of make_stream(seed, key); used to hand child seeds to
/// components.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> key);

/// Uniform integer over the closed interval [lo, hi].
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

}  // namespace wcetrange
