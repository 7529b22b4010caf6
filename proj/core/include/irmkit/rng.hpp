#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace irmkit {

/// One SplitMix64 step on state x (gamma increment, then mix). Used to derive
/// independent seeds from (seed, stream) keys.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` under base `seed`:
///   splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x9e3779b97f4a7c15)).
/// Substreams with different keys are statistically independent, so adding
/// a new consumer (environment, cell, ...) never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Portable random source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are written out here because the standard
/// library's distributions are implementation-defined and would make data
/// differ between toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via the Box-Muller transform; the second variate is cached.
  double normal();

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace irmkit
