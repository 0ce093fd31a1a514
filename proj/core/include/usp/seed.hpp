#pragma once

#include <cstdint>

namespace usp {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Named random streams derived from one run seed.
enum class SeedStream : std::uint64_t {
  System = 1,
  Inputs = 2,
  Noise = 3,
  SecondLayer = 4,
};

/// Seed for run `index` of an experiment with master seed `master`:
/// splitmix64(master ^ splitmix64(index + 1)).
constexpr std::uint64_t derive_run_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Seed of an independent stream within a run.
constexpr std::uint64_t derive_stream_seed(std::uint64_t run_seed, SeedStream stream) noexcept {
  return splitmix64(run_seed + 0x632BE59BD9B4E019ULL * static_cast<std::uint64_t>(stream));
}

}  // namespace usp
