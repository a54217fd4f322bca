#ifndef BILAYER_RNG_HPP
#define BILAYER_RNG_HPP

#include <cstdint>
#include <random>

namespace bilayer {

// Stream RNG keyed by (seed, stream index). mt19937_64 output is fully
// specified by the standard, and we only consume raw 64-bit words, so
// results are identical across platforms and independent of how work is
// partitioned over threads.
inline std::mt19937_64 make_stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Unbiased integer in [0, n) from raw 64-bit words (rejection sampling;
// std::uniform_int_distribution is not portable across implementations).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
  std::uint64_t u;
  do {
    u = rng();
  } while (u >= limit);
  return u % n;
}

// splitmix64, used to derive per-realization seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace bilayer

#endif
