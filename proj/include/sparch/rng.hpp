#pragma once

#include <cstdint>
#include <limits>

namespace sparch {

/// SplitMix64 used as a counter-based generator: draw k is a pure function of
/// (seed, k), so any stream position can be reproduced without replaying the
/// stream. This is the only source of randomness in the library.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : seed_(seed), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t k) noexcept {
    std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  result_type operator()() noexcept { return at(seed_, counter_++); }

  /// Uniform on the open interval (0, 1): 53 random bits centred in their cell.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace sparch
