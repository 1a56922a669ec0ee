#pragma once

#include <cstdint>
#include <string_view>

namespace rdnet {

/// Identifier recorded in every experiment manifest. Bump the version whenever
/// the output stream of CounterRng or any sampler below changes.
inline constexpr std::string_view kRngName = "rdnet-splitmix64-ctr/v1";

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key for replication `rep` of grid cell `cell`.
/// Depends only on the three integers, never on scheduling or other cells.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t rep) noexcept {
  std::uint64_t h = splitmix64_mix(base ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64_mix(h ^ splitmix64_mix(cell + 0x9e3779b97f4a7c15ULL));
  h = splitmix64_mix(h ^ splitmix64_mix(rep + 0x3c6ef372fe94f82bULL));
  return h;
}

/// Counter-based generator: output k is mix(key + k * golden_gamma). Platform
/// independent; all derived samplers use only IEEE arithmetic and <cmath>.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

  /// Unbiased integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  double normal() noexcept;
  double gamma(double shape) noexcept;
  double beta(double a, double b) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rdnet
