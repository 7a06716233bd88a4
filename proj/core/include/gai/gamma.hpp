#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace gai {

/// Non-negative, non-increasing sequence gamma_1, gamma_2, ... summing to one:
/// the spending schedule of LORD-type rules.
///
/// Two representations share this type. The standard sequence is
///     gamma_m = C log(max(m, 2)) / (m exp(sqrt(log m)))
/// with C fixed by normalization; it has infinite support. Tabulated sequences
/// (e.g. solver output) have finite support and are zero beyond it.
class GammaSequence {
 public:
  /// The closed-form schedule. The normalizer and a table of the first
  /// kStandardTableSize values are computed once, thread-safely.
  static const GammaSequence& standard();

  /// Finite-support sequence. Validates non-negativity, monotonicity and
  /// |sum - 1| <= 1e-8; throws InputError otherwise.
  static GammaSequence from_values(std::vector<double> values);

  /// gamma_m for m >= 1 (m = 0 yields 0).
  [[nodiscard]] double operator()(std::size_t m) const noexcept;

  /// Number of non-zero terms, or 0 for infinite support.
  [[nodiscard]] std::size_t support() const noexcept { return infinite_ ? 0 : table_->size(); }
  [[nodiscard]] bool infinite() const noexcept { return infinite_; }

  /// sum_{m > n} gamma_m; analytic tail bound for the standard sequence.
  [[nodiscard]] double tail_mass(std::size_t n) const;

  static constexpr std::size_t kStandardTableSize = std::size_t{1} << 20;

 private:
  GammaSequence(std::shared_ptr<const std::vector<double>> table, bool infinite)
      : table_(std::move(table)), infinite_(infinite) {}

  std::shared_ptr<const std::vector<double>> table_;  // table_[m-1] = gamma_m
  bool infinite_ = false;
};

/// log(max(m,2)) / (m exp(sqrt(log m))), the un-normalized standard shape.
double standard_gamma_shape(double m) noexcept;

/// Normalizer C of the standard sequence (about 0.0790820).
double standard_gamma_normalizer();

/// Analytic approximation of sum_{m > n} of the un-normalized shape:
/// the integral 2 Gamma(4, sqrt(log n)) with Euler-Maclaurin corrections.
double standard_gamma_shape_tail(std::size_t n);

}  // namespace gai
