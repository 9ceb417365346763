#pragma once

#include <cstdint>
#include <vector>

namespace balpoe {

/// SplitMix64 generator (Steele, Lea & Flood 2014). Chosen over the
/// <random> engines+distributions because every draw here must be
/// bit-reproducible across platforms and standard-library versions; the
/// distribution transforms below are part of the contract, not just the
/// raw stream. The algorithm identifier "splitmix64" is recorded in every
/// artifact that consumed randomness.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr const char* kAlgorithmId = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += kGamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 bits of mantissa.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double next_double_open() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Unbiased integer in [0, n); rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via Box-Muller (two uniforms per draw, no caching,
  /// so the consumption count is a fixed function of the call sequence).
  double next_normal();

  /// Gamma(alpha, 1) via Marsaglia-Tsang squeeze; alpha < 1 handled by the
  /// Gamma(alpha+1) * U^(1/alpha) boost.
  double next_gamma(double alpha);

  /// Fisher-Yates shuffle of [first, first+n).
  template <typename T>
  void shuffle(T* first, std::size_t n) {
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      T tmp = first[i - 1];
      first[i - 1] = first[j];
      first[j] = tmp;
    }
  }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

  /// Derived seed for sub-stream `index` of `seed`: the (index+1)-th output
  /// of SplitMix64(seed). Used to partition index spaces (per-sample,
  /// per-class, per-purpose streams) so parallel generation is independent
  /// of thread count.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Identity permutation of size n, shuffled in place with `rng`.
std::vector<int> random_permutation(int n, SplitMix64& rng);

}  // namespace balpoe
