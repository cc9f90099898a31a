#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cpw/error.hpp"

namespace cpw {

using Rng = std::mt19937_64;

/// Bijective 64-bit finalizer (SplitMix64).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream purposes, packed into the low byte of a derived key.
enum class Stream : std::uint8_t {
  data = 1,
  test_data = 2,
  split = 3,
  model = 4,
  langevin_noise = 5,
  channel = 6,
  online = 7,
  model_naive = 8,
  model_vb = 9,
  model_kcv = 10,
  model_cv = 11,
};

/// Key identifying one rng stream under a master seed. Fields are packed
/// into 64 bits without overlap (trial < 2^20, n < 2^20, fold < 2^16), so
/// distinct keys map to distinct seeds for a fixed master seed.
struct StreamKey {
  std::uint32_t trial = 0;
  std::uint32_t n = 0;
  std::uint32_t fold = 0;
  Stream stream = Stream::data;
};

/// Seed for the stream `key` under `master`. Throws ConfigError when a
/// field exceeds its packed width.
inline std::uint64_t derive_seed(std::uint64_t master, const StreamKey& key) {
  if (key.trial >= (1u << 20) || key.n >= (1u << 20) || key.fold >= (1u << 16)) {
    throw ConfigError("stream key out of range (trial/n < 2^20, fold < 2^16)");
  }
  const std::uint64_t packed = (std::uint64_t{key.trial} << 44) | (std::uint64_t{key.n} << 24) |
                               (std::uint64_t{key.fold} << 8) | static_cast<std::uint8_t>(key.stream);
  return mix64(mix64(master) ^ packed);
}

/// Child seed of an arbitrary seed, for splitting one seed into independent
/// sub-streams (e.g. initialization vs. Langevin noise).
constexpr std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace cpw
