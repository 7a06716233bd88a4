#include "gai/power.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "gai/errors.hpp"
#include "gai/normal.hpp"

namespace gai {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

AlternativeModel AlternativeModel::gaussian(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu", "must be finite and >= 0");
  return {Kind::gaussian, mu, 0.0};
}

AlternativeModel AlternativeModel::normal_prior(double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw ConfigError("variance", "must be finite and >= 0");
  }
  return {Kind::normal_prior, variance, 0.0};
}

AlternativeModel AlternativeModel::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError("mean", "must be positive");
  return {Kind::exponential, mean, 0.0};
}

AlternativeModel AlternativeModel::simple(double shift) {
  if (!std::isfinite(shift)) throw ConfigError("shift", "must be finite");
  return {Kind::simple, shift, 0.0};
}

AlternativeModel AlternativeModel::beta(double a, double b) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("a", "must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("b", "must be positive");
  return {Kind::beta, a, b};
}

std::string AlternativeModel::describe() const {
  switch (kind_) {
    case Kind::gaussian: return "gaussian(mu=" + fmt(p1_) + ")";
    case Kind::normal_prior: return "normal_prior(variance=" + fmt(p1_) + ")";
    case Kind::exponential: return "exponential(mean=" + fmt(p1_) + ")";
    case Kind::simple: return "simple(A=" + fmt(p1_) + ")";
    case Kind::beta: return "beta(a=" + fmt(p1_) + ",b=" + fmt(p2_) + ")";
  }
  return {};
}

double gaussian_mixture_cdf(double x, double mu) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double z = normal_upper_quantile(x / 2.0);
  return normal_cdf(-z - mu) + normal_cdf(mu - z);
}

double AlternativeModel::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (x >= 1.0) return 1.0;
  switch (kind_) {
    case Kind::gaussian:
      return gaussian_mixture_cdf(x, p1_);
    case Kind::normal_prior: {
      const double z = normal_upper_quantile(x / 2.0);
      return 2.0 * normal_sf(z / std::sqrt(1.0 + p1_));
    }
    case Kind::exponential: {
      // P(theta + e >= z) with theta ~ Exp(rate l).
      const double z = normal_upper_quantile(x);
      const double l = 1.0 / p1_;
      return normal_sf(z) + std::exp(0.5 * l * l - l * z) * normal_cdf(z - l);
    }
    case Kind::simple: {
      const double z = normal_upper_quantile(x);
      return normal_sf(z - p1_);
    }
    case Kind::beta:
      return boost::math::ibeta(p1_, p2_, x);
  }
  return 0.0;
}

double AlternativeModel::density(double x) const {
  x = std::clamp(x, std::numeric_limits<double>::min(), 1.0);
  switch (kind_) {
    case Kind::gaussian: {
      const double z = normal_upper_quantile(x / 2.0);
      return 0.5 * (std::exp(p1_ * z - 0.5 * p1_ * p1_) + std::exp(-p1_ * z - 0.5 * p1_ * p1_));
    }
    case Kind::normal_prior: {
      const double z = normal_upper_quantile(x / 2.0);
      const double s2 = 1.0 + p1_;
      return std::exp(0.5 * z * z * (1.0 - 1.0 / s2)) / std::sqrt(s2);
    }
    case Kind::exponential: {
      // Density of Z at z divided by phi(z).
      const double z = normal_upper_quantile(x);
      const double l = 1.0 / p1_;
      return l * std::exp(0.5 * l * l - l * z) * normal_cdf(z - l) / normal_pdf(z);
    }
    case Kind::simple: {
      const double z = normal_upper_quantile(x);
      return std::exp(p1_ * z - 0.5 * p1_ * p1_);
    }
    case Kind::beta:
      return boost::math::ibeta_derivative(p1_, p2_, x);
  }
  return 0.0;
}

MixtureMarginal::MixtureMarginal(double pi1, AlternativeModel alternative)
    : pi1_(pi1), alt_(alternative) {
  if (!(pi1 >= 0.0 && pi1 <= 1.0)) throw ConfigError("pi1", "must lie in [0, 1]");
}

double MixtureMarginal::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (x >= 1.0) return 1.0;
  return (1.0 - pi1_) * x + (pi1_ > 0.0 ? pi1_ * alt_.cdf(x) : 0.0);
}

double MixtureMarginal::density(double x) const {
  return (1.0 - pi1_) + (pi1_ > 0.0 ? pi1_ * alt_.density(x) : 0.0);
}

double MixtureMarginal::quantile(double y) const {
  if (!(y > 0.0)) return 0.0;
  if (y >= 1.0) return 1.0;
  double hi = pi1_ < 1.0 ? std::min(1.0, y / (1.0 - pi1_)) : 1.0;
  double lo = hi;
  while (cdf(lo) >= y) {
    lo *= 0.5;
    if (lo < 1e-300) return lo;
  }
  if (cdf(hi) <= y) return hi;
  std::uintmax_t iterations = 200;
  const auto f = [&](double x) { return cdf(x) - y; };
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------

PowerBound power_lower_bound_exact(const std::function<double(double)>& G,
                                   const GammaSequence& gamma, double b0,
                                   const BoundOptions& options) {
  PowerBound out;
  long double sum = 0.0L;
  double product = 1.0;
  double ratio = 1.0;
  const std::size_t limit = options.horizon > 0 ? options.horizon : options.max_terms;
  std::size_t m = 1;
  for (; m <= limit; ++m) {
    ratio = 1.0 - std::clamp(G(b0 * gamma(m)), 0.0, 1.0);
    product *= ratio;
    sum += product;
    if (options.horizon == 0 && product < options.relative_cutoff * static_cast<double>(sum)) {
      break;
    }
    if (product == 0.0) break;
  }
  out.terms = std::min(m, limit);
  out.series = static_cast<double>(sum);
  if (options.horizon == 0 && product > 0.0) {
    // Geometric continuation with the last ratio.
    out.tail = ratio < 1.0 ? product * ratio / (1.0 - ratio)
                           : std::numeric_limits<double>::infinity();
    out.precise = out.tail <= 1e-6 * out.series;
  }
  const double total = out.series + out.tail;
  out.value = total > 0.0 ? std::min(1.0, 1.0 / total) : 1.0;
  return out;
}

PowerBound power_lower_bound_surrogate(const std::function<double(double)>& G,
                                       const GammaSequence& gamma, double b0,
                                       const BoundOptions& options) {
  PowerBound out;
  long double sum = 0.0L;
  double term = 0.0;
  double rate = 0.0;
  const std::size_t limit = options.horizon > 0 ? options.horizon : options.max_terms;
  std::size_t m = 1;
  for (; m <= limit; ++m) {
    rate = std::clamp(G(b0 * gamma(m)), 0.0, 1.0);
    term = std::exp(-static_cast<double>(m) * rate);
    sum += term;
    if (options.horizon == 0 && term < options.relative_cutoff * static_cast<double>(sum)) break;
  }
  out.terms = std::min(m, limit);
  out.series = static_cast<double>(sum);
  if (options.horizon == 0 && term > 0.0) {
    const double r = std::exp(-rate);
    out.tail = r < 1.0 ? term * r / (1.0 - r) : std::numeric_limits<double>::infinity();
    out.precise = out.tail <= 1e-6 * out.series;
  }
  const double total = out.series + out.tail;
  out.value = total > 0.0 ? std::min(1.0, 1.0 / total) : 1.0;
  return out;
}

// ---------------------------------------------------------------------------

double kkt_rate(const MixtureMarginal& G, std::size_t m, double beta) {
  const double md = static_cast<double>(m);
  return md * G.density(beta) * std::exp(-md * G.cdf(beta));
}

namespace {

constexpr double kLogTiny = -690.0;  // about log(1e-300)

// log sum_{m=1}^{k} m exp(-m g), for g >= 0. Closed form with expm1 when k g
// is not small, a Taylor expansion in g over power sums when it is.
double log_prefix_weighted_sum(std::size_t k, double g) {
  const double kd = static_cast<double>(k);
  const double a = kd * g;
  if (a < 1e-3) {
    const double p1 = kd * (kd + 1.0) / 2.0;
    const double p2 = p1 * (2.0 * kd + 1.0) / 3.0;
    const double p3 = p1 * p1;
    const double p4 = p2 * (3.0 * kd * kd + 3.0 * kd - 1.0) / 5.0;
    const double p5 = p3 * (2.0 * kd * kd + 2.0 * kd - 1.0) / 3.0;
    const double s =
        p1 - g * (p2 - g * (p3 / 2.0 - g * (p4 / 6.0 - g * p5 / 24.0)));
    return std::log(s);
  }
  // x (1 - x^k - k x^k (1 - x)) / (1 - x)^2 with x = e^{-g}.
  const double one_minus_x = -std::expm1(-g);
  const double one_minus_y = -std::expm1(-a);
  const double y = std::exp(-a);
  const double num = one_minus_y - kd * y * one_minus_x;
  return -g + std::log(num) - 2.0 * std::log(one_minus_x);
}

// log of the mean of m G'(e^t) exp(-m G(e^t)) over m in [first, last], minus
// log(eta). Decreasing in t since G is concave.
double log_kkt_gap(const MixtureMarginal& G, std::size_t first, std::size_t last, double t,
                   double log_eta) {
  const double beta = std::exp(t);
  const double g = G.cdf(beta);
  const double base = std::log(G.density(beta)) - log_eta;
  const double len = static_cast<double>(last - first + 1);
  if (first == last) {
    const double md = static_cast<double>(first);
    return base + std::log(md) - md * g;
  }
  if (first == 1 && last > 64) return base + log_prefix_weighted_sum(last, g) - std::log(len);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t m = first; m <= last; ++m) {
    const double md = static_cast<double>(m);
    top = std::max(top, std::log(md) - md * g);
  }
  double acc = 0.0;
  for (std::size_t m = first; m <= last; ++m) {
    const double md = static_cast<double>(m);
    acc += std::exp(std::log(md) - md * g - top);
  }
  return base + top + std::log(acc / len);
}

// Largest-branch root of the averaged KKT condition over m in [first, last],
// searched downward from `guess`.
double solve_beta(const MixtureMarginal& G, std::size_t first, std::size_t last, double log_eta,
                  double guess) {
  const auto f = [&](double t) { return log_kkt_gap(G, first, last, t, log_eta); };
  double hi = std::min(0.0, std::log(std::max(guess, 1e-300)) + std::log(2.0));
  double f_hi = f(hi);
  while (f_hi > 0.0 && hi < 0.0) {
    hi = std::min(0.0, hi + 2.0);
    f_hi = f(hi);
  }
  if (f_hi >= 0.0) return 1.0;
  double lo = hi - std::log(2.0);
  double f_lo = f(lo);
  double step = std::log(4.0);
  while (f_lo < 0.0) {
    hi = lo;
    f_hi = f_lo;
    lo -= step;
    step *= 2.0;
    if (lo < kLogTiny) return 0.0;
    f_lo = f(lo);
  }
  if (f_lo == 0.0) return std::exp(lo);
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  if (iterations >= 200) {
    throw NumericError("optimal_gamma: inner root did not converge at m=" + std::to_string(first) +
                       ", eta=" + std::to_string(std::exp(log_eta)));
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace

OptimalGamma optimal_gamma(const MixtureMarginal& G, double b0, std::size_t horizon,
                           bool non_increasing) {
  if (horizon == 0) throw ConfigError("horizon", "must be >= 1");
  if (!(b0 > 0.0 && b0 <= 1.0)) throw ConfigError("b0", "must lie in (0, 1]");

  // The per-m roots rise with m while m G(beta) < 1. With `non_increasing`,
  // adjacent violators are pooled into blocks that share one value solving the
  // averaged condition, which gives the optimum over non-increasing beta.
  struct Block {
    std::size_t first, last;
    double value;
  };
  std::vector<double> roots(horizon, b0);
  std::vector<double> beta(horizon, b0);
  std::vector<Block> blocks;
  std::size_t pooled = 0;
  const auto fill = [&](double log_eta) {
    for (std::size_t m = 1; m <= horizon; ++m) {
      double guess = roots[m - 1];
      if (m > 1) guess = std::min(guess, std::max(roots[m - 2], 1e-300) * 4.0);
      roots[m - 1] = solve_beta(G, m, m, log_eta, guess);
    }
    long double sum = 0.0L;
    if (!non_increasing) {
      beta = roots;
      for (double b : beta) sum += b;
      return static_cast<double>(sum) - b0;
    }
    blocks.clear();
    // Roots typically rise up to a peak and fall after it. Then the only
    // block is a prefix [1, k], where k is the first index past the peak
    // whose successor does not exceed the prefix value.
    std::size_t peak = 1;
    while (peak < horizon && roots[peak] >= roots[peak - 1]) ++peak;
    std::size_t tail = peak;
    while (tail < horizon && roots[tail] <= roots[tail - 1]) ++tail;
    if (tail == horizon) {
      std::size_t lo = peak;
      std::size_t hi = horizon;
      double v_hi = peak == 1 ? roots[0] : 0.0;
      const auto settles = [&](std::size_t k, double& v) {
        v = k == 1 ? roots[0] : solve_beta(G, 1, k, log_eta, roots[peak - 1]);
        return k == horizon || roots[k] <= v;
      };
      if (settles(lo, v_hi)) {
        hi = lo;
      } else {
        settles(hi, v_hi);
        while (hi - lo > 1) {
          const std::size_t mid = lo + (hi - lo) / 2;
          double v = 0.0;
          if (settles(mid, v)) {
            hi = mid;
            v_hi = v;
          } else {
            lo = mid;
          }
        }
      }
      blocks.push_back({1, hi, v_hi});
      for (std::size_t m = hi + 1; m <= horizon; ++m) blocks.push_back({m, m, roots[m - 1]});
    } else {
      // General shape: plain pool-adjacent-violators.
      for (std::size_t m = 1; m <= horizon; ++m) {
        Block cur{m, m, roots[m - 1]};
        while (!blocks.empty() && blocks.back().value < cur.value) {
          cur.first = blocks.back().first;
          blocks.pop_back();
          cur.value = solve_beta(G, cur.first, cur.last, log_eta, cur.value);
        }
        blocks.push_back(cur);
      }
    }
    pooled = 0;
    for (const Block& b : blocks) {
      const std::size_t len = b.last - b.first + 1;
      if (len > 1) pooled += len;
      for (std::size_t m = b.first; m <= b.last; ++m) beta[m - 1] = b.value;
      sum += static_cast<long double>(b.value) * static_cast<double>(len);
    }
    return static_cast<double>(sum) - b0;
  };

  // At eta = h_1(b0) the first term alone equals b0.
  const double h1 = kkt_rate(G, 1, b0);
  if (!(h1 > 0.0) || !std::isfinite(h1)) {
    throw NumericError("optimal_gamma: degenerate KKT rate at m=1");
  }
  double s_lo = std::log(h1);
  double f_lo = fill(s_lo);
  for (int k = 0; f_lo < 0.0; ++k) {
    if (k > 60) throw NumericError("optimal_gamma: cannot bracket eta from below");
    s_lo -= std::log(10.0);
    f_lo = fill(s_lo);
  }
  double s_hi = s_lo;
  double f_hi = f_lo;
  for (int k = 0; f_hi > 0.0; ++k) {
    if (k > 200) throw NumericError("optimal_gamma: cannot bracket eta from above");
    s_lo = s_hi;
    f_lo = f_hi;
    s_hi += std::log(10.0);
    f_hi = fill(s_hi);
  }

  double log_eta = s_hi;
  if (f_hi != 0.0 && f_lo != 0.0) {
    std::uintmax_t iterations = 300;
    const auto tol = [](double a, double b) { return std::fabs(a - b) <= 1e-13; };
    const auto [a, b] =
        boost::math::tools::toms748_solve(fill, s_lo, s_hi, f_lo, f_hi, tol, iterations);
    log_eta = 0.5 * (a + b);
  } else if (f_lo == 0.0) {
    log_eta = s_lo;
  }
  const double residual = fill(log_eta);
  if (!(std::fabs(residual) <= 1e-9)) {
    throw NumericError("optimal_gamma: sum of beta misses b0 by " + std::to_string(residual));
  }

  OptimalGamma out;
  out.gamma.resize(horizon);
  long double total = 0.0L;
  for (double b : beta) total += b;
  for (std::size_t k = 0; k < horizon; ++k) {
    out.gamma[k] = static_cast<double>(beta[k] / total);
  }
  out.beta = std::move(beta);
  out.eta = std::exp(log_eta);
  out.pooled = non_increasing ? pooled : 0;
  return out;
}

GammaSequence OptimalGamma::sequence() const { return GammaSequence::from_values(gamma); }

}  // namespace gai
