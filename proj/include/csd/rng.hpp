#ifndef CSD_RNG_HPP_
#define CSD_RNG_HPP_

#include <cstdint>
#include <random>

namespace csd {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of substream `stream` under `root`. Every parallel loop derives one
// generator per work item from this, so results do not depend on how the
// items are spread over workers.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

inline Rng make_stream(std::uint64_t root, std::uint64_t stream) {
  return Rng(derive_seed(root, stream));
}

// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace csd

#endif  // CSD_RNG_HPP_
