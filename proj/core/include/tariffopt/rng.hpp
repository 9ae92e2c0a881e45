#pragma once

#include <cstdint>
#include <random>

namespace tariffopt {

// Stream ids keep independent consumers of one user seed decorrelated.
enum class RngStream : std::uint64_t {
  Synthesis = 1,
  Bootstrap = 2,
  BetaSampling = 3,
  PoolPaths = 4,
  SolarPaths = 5,
  UniformBaseline = 6,
  Households = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, RngStream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, stream, index));
}

}  // namespace tariffopt
