#pragma once

// Offline procedures used as comparison points.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gai {

struct OfflineResult {
  std::vector<std::uint8_t> rejected;  // per input index, 1 = rejected
  std::size_t threshold_index = 0;     // i_BH; 0 when nothing is rejected
  double cutoff = 0.0;                 // p_(i_BH), 0 when nothing is rejected

  [[nodiscard]] std::size_t count() const noexcept;
};

/// Step-up with thresholds level * i / N: i_BH = max{i : p_(i) <= level i / N}.
/// Throws InputError on NaN or out-of-range p-values.
OfflineResult bh(std::span<const double> pvalues, double alpha);

/// Storey's factor H = (1 - lambda) N / (#{p_i > lambda} + 1).
double storey_factor(std::span<const double> pvalues, double lambda);

/// BH with thresholds alpha H i / N for a given factor H.
OfflineResult adaptive_bh(std::span<const double> pvalues, double alpha, double factor);

/// adaptive_bh with H = storey_factor(pvalues, lambda).
OfflineResult storey_bh(std::span<const double> pvalues, double alpha, double lambda);

/// BH at level alpha / (1 + 1/2 + ... + 1/N).
OfflineResult by_adjusted_bh(std::span<const double> pvalues, double alpha);

/// Rejects H_j iff |z_j| >= t.
std::vector<std::uint8_t> single_step(std::span<const double> z, double t);

}  // namespace gai
