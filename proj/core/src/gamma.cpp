#include "gai/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gai/errors.hpp"

namespace gai {
namespace {

// Terms summed explicitly before switching to the analytic tail.
constexpr std::size_t kNormalizationTerms = 1'000'000;

double shape_derivative(double x) {
  const double lx = std::log(x);
  const double f = standard_gamma_shape(x);
  return f * (1.0 / (x * lx) - 1.0 / x - 0.5 / (x * std::sqrt(lx)));
}

}  // namespace

double standard_gamma_shape(double m) noexcept {
  if (m < 1.0) return 0.0;
  const double lm = std::log(m);
  return std::log(std::max(m, 2.0)) / (m * std::exp(std::sqrt(lm)));
}

double standard_gamma_shape_tail(std::size_t n) {
  const double x = static_cast<double>(n);
  const double u = std::sqrt(std::log(x));
  // int_x^inf log t / (t e^{sqrt(log t)}) dt = 2 int_u^inf s^3 e^{-s} ds.
  const double integral = 2.0 * std::exp(-u) * (((u + 3.0) * u + 6.0) * u + 6.0);
  // sum_{m > n} f(m) = int_n^inf f - f(n)/2 - f'(n)/12 + O(f''').
  return integral - 0.5 * standard_gamma_shape(x) - shape_derivative(x) / 12.0;
}

double standard_gamma_normalizer() {
  static const double c = [] {
    long double sum = 0.0L;
    for (std::size_t m = kNormalizationTerms; m >= 1; --m) {
      sum += standard_gamma_shape(static_cast<double>(m));
    }
    sum += standard_gamma_shape_tail(kNormalizationTerms);
    return static_cast<double>(1.0L / sum);
  }();
  return c;
}

const GammaSequence& GammaSequence::standard() {
  static const GammaSequence seq = [] {
    const double c = standard_gamma_normalizer();
    auto table = std::make_shared<std::vector<double>>(kStandardTableSize);
    for (std::size_t m = 1; m <= kStandardTableSize; ++m) {
      (*table)[m - 1] = c * standard_gamma_shape(static_cast<double>(m));
    }
    return GammaSequence(std::move(table), true);
  }();
  return seq;
}

GammaSequence GammaSequence::from_values(std::vector<double> values) {
  if (values.empty()) throw InputError("gamma sequence must have at least one term");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw InputError("gamma_" + std::to_string(i + 1) + " must be finite and non-negative");
    }
    if (i > 0 && values[i] > values[i - 1] * (1.0 + 1e-12) + 1e-300) {
      throw InputError("gamma sequence must be non-increasing (term " + std::to_string(i + 1) +
                       ")");
    }
    sum += values[i];
  }
  if (std::fabs(static_cast<double>(sum) - 1.0) > 1e-8) {
    throw InputError("gamma sequence must sum to 1 (got " +
                     std::to_string(static_cast<double>(sum)) + ")");
  }
  return GammaSequence(std::make_shared<const std::vector<double>>(std::move(values)), false);
}

double GammaSequence::operator()(std::size_t m) const noexcept {
  if (m == 0) return 0.0;
  if (m <= table_->size()) return (*table_)[m - 1];
  if (!infinite_) return 0.0;
  return standard_gamma_normalizer() * standard_gamma_shape(static_cast<double>(m));
}

double GammaSequence::tail_mass(std::size_t n) const {
  if (infinite_) {
    if (n < 1000) {
      long double head = 0.0L;
      for (std::size_t m = 1; m <= n; ++m) head += (*this)(m);
      return static_cast<double>(1.0L - head);
    }
    return standard_gamma_normalizer() * standard_gamma_shape_tail(n);
  }
  long double sum = 0.0L;
  for (std::size_t m = table_->size(); m > n; --m) sum += (*table_)[m - 1];
  return static_cast<double>(sum);
}

}  // namespace gai
