#include "gai/rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "gai/errors.hpp"
#include "gai/normal.hpp"

namespace gai {

double lord_level(const GammaSequence& gamma, std::size_t steps_since_discovery,
                  double wealth_at_discovery) noexcept {
  return gamma(steps_since_discovery) * wealth_at_discovery;
}

double ai_level(double wealth, std::size_t steps_since_discovery, bool cap) noexcept {
  if (!(wealth > 0.0)) return 0.0;
  double level = wealth / (1.0 + static_cast<double>(steps_since_discovery));
  if (cap) level = std::min(level, wealth / (1.0 + wealth));
  return std::min(level, kMaxLevel);
}

double ero_residual(double alpha, double payout, double effect) noexcept {
  const double rho = normal_cdf(effect + normal_quantile(alpha));
  return payout / rho - payout / alpha + 1.0;
}

double ero_solve_alpha(double payout, double effect) {
  // The root lies below the payout; past this point it is not representable.
  if (!(payout >= 1e-280)) return 0.0;
  if (!(effect > 0.0)) throw NumericError("ero_ai: effect size must be positive");

  // Solved in the equivalent form log(alpha) = log(payout) - log1p(payout/rho),
  // with t = log(alpha). At alpha = payout/(1+payout) the gap is
  // log1p(payout/rho) - log1p(payout) > 0; it tends to -inf as alpha -> 0.
  const double log_payout = std::log(payout);
  const auto h = [&](double t) {
    const double rho = normal_cdf(effect + normal_quantile(std::exp(t)));
    return t - log_payout + std::log1p(payout / rho);
  };
  double hi = std::log(std::min(payout / (1.0 + payout), kMaxLevel));
  double h_hi = h(hi);
  if (!(h_hi > 0.0)) {
    // rho rounds to 1 for large effects and hi is then the root up to rounding
    const bool at_root = h_hi > -8 * std::numeric_limits<double>::epsilon() * (1.0 - hi);
    if (at_root || hi == std::log(kMaxLevel)) return std::exp(hi);
    throw NumericError("ero_ai: residual not positive at the upper bracket (payout " +
                       std::to_string(payout) + ")");
  }
  double lo = hi;
  double h_lo = h_hi;
  while (!(h_lo < 0.0)) {
    lo -= std::log(1e3);
    if (lo < std::log(1e-300)) throw NumericError("ero_ai: no sign change of the residual");
    h_lo = h(lo);
  }
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      h, lo, hi, h_lo, h_hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  const double alpha = std::fabs(h(a)) < std::fabs(h(b)) ? std::exp(a) : std::exp(b);
  return std::clamp(alpha, std::numeric_limits<double>::min(), kMaxLevel);
}

StepPlan asr_plan(double wealth, double kappa, double payout_fraction, double b0) noexcept {
  if (!(wealth > 0.0)) return {};
  const double phi = payout_fraction * wealth;
  const double alpha = std::min(phi / kappa, kMaxLevel);
  const double psi = std::min(kappa * alpha + b0, kappa - 1.0 + b0);
  return {alpha, phi, psi, false};
}

double bonferroni_level(std::size_t m, double alpha, const GammaSequence& gamma) noexcept {
  return gamma(m) * alpha;
}

// ---------------------------------------------------------------------------

Lord::Lord(RuleParams params, GammaSequence gamma)
    : params_(params), gamma_(std::move(gamma)), wealth_at_tau_(params.w0) {}

double Lord::level() const noexcept {
  return lord_level(gamma_, steps_since_tau_, wealth_at_tau_);
}

StepPlan Lord::plan(double wealth) const {
  // The telescoping argument keeps the level below the wealth; the clamp only
  // absorbs rounding.
  const double a = std::clamp(level(), 0.0, std::max(wealth, 0.0));
  return {a, a, params_.b0, false};
}

void Lord::observe(const StepPlan&, bool rejected, double wealth_after) {
  ++step_;
  if (rejected) {
    tau_ = step_;
    wealth_at_tau_ = wealth_after;
    steps_since_tau_ = 1;
  } else {
    ++steps_since_tau_;
  }
}

AlphaInvesting::AlphaInvesting(RuleParams params, bool cap_levels)
    : params_(params), cap_levels_(cap_levels) {}

StepPlan AlphaInvesting::plan(double wealth) const {
  const double a = ai_level(wealth, steps_since_tau_, cap_levels_);
  if (a == 0.0) return {};
  const double phi = a / (1.0 - a);
  return {a, phi, params_.b0 + phi, false};
}

void AlphaInvesting::observe(const StepPlan&, bool rejected, double) {
  steps_since_tau_ = rejected ? 1 : steps_since_tau_ + 1;
}

EroAlphaInvesting::EroAlphaInvesting(RuleParams params, Options options)
    : params_(params), options_(options) {}

StepPlan EroAlphaInvesting::plan(double wealth) const {
  if (!(wealth > 0.0)) return {};
  const double phi = options_.payout_fraction * wealth;
  const double a = ero_solve_alpha(phi, options_.effect);
  double psi = phi / a + params_.b0 - 1.0;
  if (options_.clip_payoff) psi = std::min(psi, phi + params_.b0);
  return {a, phi, std::max(psi, 0.0), false};
}

AlphaSpendingRewards::AlphaSpendingRewards(RuleParams params, double kappa,
                                           double payout_fraction)
    : params_(params), kappa_(kappa), payout_fraction_(payout_fraction) {
  if (!(kappa >= 1.0)) throw ConfigError("kappa", "must be >= 1");
  if (!(payout_fraction > 0.0 && payout_fraction < 1.0)) {
    throw ConfigError("payout_fraction", "must lie in (0, 1)");
  }
}

StepPlan AlphaSpendingRewards::plan(double wealth) const {
  return asr_plan(wealth, kappa_, payout_fraction_, params_.b0);
}

OnlineBonferroni::OnlineBonferroni(RuleParams params, GammaSequence gamma)
    : params_(params), gamma_(std::move(gamma)) {}

StepPlan OnlineBonferroni::plan(double wealth) const {
  const double a = std::clamp(bonferroni_level(step_ + 1, params_.alpha, gamma_), 0.0,
                              std::max(wealth, 0.0));
  return {a, a, 0.0, false};
}

DiscountSequence::DiscountSequence(double scale, GammaSequence gamma)
    : scale_(scale), gamma_(std::move(gamma)) {}

double DiscountSequence::operator()(std::size_t i) const noexcept {
  if (i == 0) return 0.0;
  return scale_ * gamma_(i) / (1.0 + std::log(static_cast<double>(i)));
}

double DiscountSequence::budget(std::size_t n) const {
  if (n == 0) return scale_ * (gamma_.infinite() ? 1.0 : 1.0 - gamma_.tail_mass(gamma_.support()));
  long double sum = 0.0L;
  for (std::size_t i = n; i >= 1; --i) {
    sum += (*this)(i) * (1.0 + std::log(static_cast<double>(i)));
  }
  return static_cast<double>(sum);
}

DependentLord::DependentLord(RuleParams params, GammaSequence gamma)
    : params_(params),
      xi_(params.alpha / params.b0, std::move(gamma)),
      wealth_at_tau_(params.w0) {}

StepPlan DependentLord::plan(double wealth) const {
  const double a = std::clamp(dep_lord_level(xi_(step_ + 1), wealth_at_tau_), 0.0,
                              std::max(wealth, 0.0));
  return {a, a, params_.b0, false};
}

void DependentLord::observe(const StepPlan&, bool rejected, double wealth_after) {
  ++step_;
  if (rejected) wealth_at_tau_ = wealth_after;
}

double DependentLord::fdr_bound(std::size_t n) const { return params_.b0 * xi_.budget(n); }

RuleParams FdxLord::default_params(double alpha, double fdx_threshold) {
  return RuleParams{(fdx_threshold - alpha) / 2.0, alpha, alpha};
}

FdxLord::FdxLord(RuleParams params, double fdx_threshold, GammaSequence gamma)
    : inner_(params, std::move(gamma)), fdx_threshold_(fdx_threshold) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (!(fdx_threshold > params.alpha && fdx_threshold < 1.0)) {
    throw ConfigError("fdx_threshold", "must satisfy alpha < fdx_threshold < 1");
  }
  if (!(params.b0 > 0.0 && params.b0 <= 1.0)) throw ConfigError("b0", "must lie in (0, 1]");
  if (!(params.w0 >= 0.0 && params.w0 < fdx_threshold - params.b0)) {
    throw ConfigError("w0", "requires 0 <= w0 < fdx_threshold - b0");
  }
  budget_ = (fdx_threshold - params.b0 - params.w0) / (1.0 - params.alpha);
}

StepPlan FdxLord::plan(double wealth) const {
  if (stopped_) return {0.0, 0.0, 0.0, true};
  const StepPlan p = inner_.plan(wealth);
  if (p.alpha + accumulated_ > budget_) return {0.0, 0.0, 0.0, true};
  return p;
}

void FdxLord::observe(const StepPlan& plan, bool rejected, double wealth_after) {
  if (stopped_) return;
  if (plan.stopped) {
    stopped_ = true;
    return;
  }
  if (!rejected) accumulated_ += plan.alpha;
  inner_.observe(plan, rejected, wealth_after);
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& rule_ids() {
  static const std::vector<std::string> ids{"lord",       "ai",       "ero_ai",  "asr",
                                            "bonferroni", "dep_lord", "fdx_lord"};
  return ids;
}

std::unique_ptr<Rule> make_rule(const RuleSpec& spec) {
  const auto& p = spec.params;
  if (spec.id == "fdx_lord") return std::make_unique<FdxLord>(p, spec.fdx_threshold, spec.gamma);
  if (spec.id == "bonferroni") {
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
    return std::make_unique<OnlineBonferroni>(p, spec.gamma);
  }
  if (spec.id == "lord") {
    p.validate(spec.target);
    return std::make_unique<Lord>(p, spec.gamma);
  }
  if (spec.id == "ai") {
    p.validate(spec.target);
    return std::make_unique<AlphaInvesting>(p, spec.cap_levels);
  }
  if (spec.id == "ero_ai") {
    p.validate(spec.target);
    if (!(spec.effect > 0.0)) throw ConfigError("effect", "must be positive");
    if (!(spec.payout_fraction > 0.0 && spec.payout_fraction < 1.0)) {
      throw ConfigError("payout_fraction", "must lie in (0, 1)");
    }
    return std::make_unique<EroAlphaInvesting>(
        p, EroAlphaInvesting::Options{spec.effect, spec.payout_fraction, spec.clip_payoff});
  }
  if (spec.id == "asr") {
    p.validate(spec.target);
    return std::make_unique<AlphaSpendingRewards>(p, spec.kappa, spec.payout_fraction);
  }
  if (spec.id == "dep_lord") {
    p.validate(spec.target);
    return std::make_unique<DependentLord>(p, spec.gamma);
  }
  throw ConfigError("rule", "unknown rule '" + spec.id + "'");
}

RuleFactory rule_factory(RuleSpec spec) {
  make_rule(spec);  // surface configuration errors at construction
  return [spec = std::move(spec)] { return make_rule(spec); };
}

}  // namespace gai
