#pragma once

#include <cstdint>
#include <string_view>

namespace fsel {

/// Counter-based generator: draw i of stream `seed` is
/// splitmix64_finalize(seed + (i + 1) * 0x9E3779B97F4A7C15).
/// Any implementation of this formula reproduces our sampled prefixes.
class CounterRng {
public:
  static constexpr std::string_view kAlgorithmId = "splitmix64-ctr";

  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const noexcept { return seed_; }

private:
  std::uint64_t seed_;
};

/// Sequential convenience wrapper for tests and Monte-Carlo loops.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) noexcept : rng_(seed) {}

  std::uint64_t next_bits() noexcept { return rng_.bits(counter_++); }
  double next_uniform() noexcept { return rng_.uniform(counter_++); }
  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_bits()) * bound) >> 64);
  }

private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace fsel
