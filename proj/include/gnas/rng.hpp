#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "gnas/errors.hpp"

namespace gnas {

/// All randomness in the library flows through std::mt19937_64 plus the
/// helpers below. std::mt19937_64 output is pinned by the standard, and the
/// helpers avoid std::uniform_*_distribution (whose mappings are
/// implementation-defined), so seeded runs reproduce byte-identically across
/// standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 mixer; used to derive independent seeds and hash noise.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a byte string; stable content hash for keys.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Uniform integer in [0, n) via rejection sampling (no modulo bias).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw ContractError("uniform_index: n must be positive");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a categorical distribution. Consumes exactly one
/// engine output, which keeps parallel samplers in lockstep.
inline int sample_categorical(Rng& rng, std::span<const double> probs) {
  if (probs.empty()) throw ContractError("sample_categorical: empty distribution");
  const double u = uniform_unit(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace gnas
