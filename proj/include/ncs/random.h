#pragma once

#include <cstdint>
#include <random>

namespace ncs {

using Rng = std::mt19937_64;

/// Independent stream for one Monte Carlo path, derived from (seed, index).
inline Rng MakeStreamRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x6e63u};
  return Rng(seq);
}

inline double StandardNormal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace ncs
