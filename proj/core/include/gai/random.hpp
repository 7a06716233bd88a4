#pragma once

#include <cstdint>
#include <random>

namespace gai {

/// Seedable generator for simulation streams.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Variates are produced by explicit transforms (53-bit uniforms,
/// inverse-CDF normals) instead of the <random> distributions, whose algorithms
/// are implementation-defined, so a seed reproduces the same stream on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

  double exponential(double mean);

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Per-trial seed: a fixed mixing function of (master_seed, trial_index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept;

}  // namespace gai
