#pragma once

// Non-null p-value distributions, LORD power lower bounds and the
// surrogate-optimal spending sequence.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gai/gamma.hpp"

namespace gai {

/// Distribution F of a non-null p-value.
class AlternativeModel {
 public:
  enum class Kind {
    gaussian,      // Z ~ N(mu, 1), two-sided p-values
    normal_prior,  // theta ~ N(0, v), Z = theta + N(0, 1), two-sided
    exponential,   // theta ~ Exp with the given mean, one-sided
    simple,        // theta = A, one-sided
    beta,          // p ~ Beta(a, b)
  };

  static AlternativeModel gaussian(double mu);
  static AlternativeModel normal_prior(double variance);
  static AlternativeModel exponential(double mean);
  static AlternativeModel simple(double shift);
  static AlternativeModel beta(double a, double b);

  /// F(x) for x in [0, 1]; clamps outside.
  [[nodiscard]] double cdf(double x) const;
  /// F'(x) in closed form, x in (0, 1).
  [[nodiscard]] double density(double x) const;

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double first() const noexcept { return p1_; }
  [[nodiscard]] double second() const noexcept { return p2_; }
  /// e.g. "gaussian(mu=3)".
  [[nodiscard]] std::string describe() const;

 private:
  AlternativeModel(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

  Kind kind_;
  double p1_;
  double p2_;
};

/// F(x) = Phi(-z - mu) + Phi(mu - z), z = Phi^{-1}(1 - x/2).
double gaussian_mixture_cdf(double x, double mu);

/// G(x) = (1 - pi1) x + pi1 F(x).
class MixtureMarginal {
 public:
  MixtureMarginal(double pi1, AlternativeModel alternative);

  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double density(double x) const;
  /// G^{-1}(y), y in [0, 1].
  [[nodiscard]] double quantile(double y) const;

  [[nodiscard]] double pi1() const noexcept { return pi1_; }
  [[nodiscard]] const AlternativeModel& alternative() const noexcept { return alt_; }

  /// Callable view for the bound functions.
  [[nodiscard]] std::function<double(double)> as_function() const {
    return [m = *this](double x) { return m.cdf(x); };
  }

 private:
  double pi1_;
  AlternativeModel alt_;
};

struct BoundOptions {
  /// Sum exactly over m <= horizon and nothing beyond. 0 means the full series
  /// with truncation and a tail estimate.
  std::size_t horizon = 0;
  std::size_t max_terms = 10'000'000;
  double relative_cutoff = 1e-12;
};

struct PowerBound {
  double value = 0.0;     // the bound, clamped to [0, 1]
  double series = 0.0;    // truncated series sum
  double tail = 0.0;      // tail estimate added to the series
  std::size_t terms = 0;  // terms summed
  bool precise = true;    // false when the tail estimate is not negligible
};

/// min(1, 1 / sum_{m>=1} prod_{l<=m} (1 - G(b0 gamma_l))).
PowerBound power_lower_bound_exact(const std::function<double(double)>& G,
                                   const GammaSequence& gamma, double b0,
                                   const BoundOptions& options = {});

/// min(1, 1 / sum_{m>=1} exp(-m G(b0 gamma_m))).
PowerBound power_lower_bound_surrogate(const std::function<double(double)>& G,
                                       const GammaSequence& gamma, double b0,
                                       const BoundOptions& options = {});

struct OptimalGamma {
  std::vector<double> gamma;  // gamma_m = beta_m / sum(beta), m = 1..horizon
  std::vector<double> beta;   // beta_m = b0 gamma_m
  double eta = 0.0;           // Lagrange multiplier
  std::size_t pooled = 0;     // indices sharing a value with a neighbour

  /// The spending sequence; throws InputError when gamma is not non-increasing.
  [[nodiscard]] GammaSequence sequence() const;
};

/// m G'(beta) exp(-m G(beta)).
double kkt_rate(const MixtureMarginal& G, std::size_t m, double beta);

/// Maximizes the surrogate over sequences supported on 1..horizon with
/// sum beta_m = b0. Each beta_m solves eta = m G'(beta_m) exp(-m G(beta_m)),
/// and eta is adjusted until the sum matches. With `non_increasing` (the
/// default) the maximization is restricted to non-increasing sequences, which
/// LORD requires: runs of indices whose free roots would increase share one
/// value solving the condition averaged over the run. Throws NumericError when
/// a root cannot be bracketed.
OptimalGamma optimal_gamma(const MixtureMarginal& G, double b0, std::size_t horizon,
                           bool non_increasing = true);

}  // namespace gai
