#pragma once

#include <cstdint>
#include <random>

namespace ioc {

/// Uniform double in [0, 1) from the generator's raw bits. The mapping is
/// fixed (not implementation-defined like std::uniform_real_distribution),
/// so seeded streams are identical across platforms and toolchains.
inline double uniform_unit(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// Per-item seed derivation (splitmix64 mix), so items can be generated
/// independently and in any order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace ioc
