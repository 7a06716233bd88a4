#pragma once

// Concrete online rules. Identifiers: lord, ai, ero_ai, asr, bonferroni,
// dep_lord, fdx_lord.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gai/core.hpp"
#include "gai/gamma.hpp"

namespace gai {

// ---------------------------------------------------------------------------
// Level functions, exposed for direct testing.

/// LORD: gamma_{i - tau_i} W(tau_i).
double lord_level(const GammaSequence& gamma, std::size_t steps_since_discovery,
                  double wealth_at_discovery) noexcept;

/// Alpha-investing level W(j-1) / (1 + j - tau_j). With `cap` the level is
/// limited to W/(1+W), so that alpha/(1-alpha) <= W, and to 1 - 1e-9.
double ai_level(double wealth, std::size_t steps_since_discovery, bool cap = true) noexcept;

/// Largest level alpha-investing can use without breaking the wealth constraint.
inline constexpr double kMaxLevel = 1.0 - 1e-9;

/// Solves payout/rho(alpha) = payout/alpha - 1 for alpha in (0, 1), where
/// rho(alpha) = Phi(effect + Phi^{-1}(alpha)) is the power of a one-sided
/// z-test against a shift `effect`. Throws NumericError when no root is bracketed.
double ero_solve_alpha(double payout, double effect);

/// payout/rho(alpha) - payout/alpha + 1; zero at the ERO level.
double ero_residual(double alpha, double payout, double effect) noexcept;

/// Alpha spending with rewards: phi = c1 W, alpha = phi/kappa,
/// psi = min(kappa alpha + b0, kappa - 1 + b0).
StepPlan asr_plan(double wealth, double kappa, double payout_fraction, double b0) noexcept;

/// gamma_m alpha.
double bonferroni_level(std::size_t m, double alpha,
                        const GammaSequence& gamma = GammaSequence::standard()) noexcept;

/// xi_i W(tau_i).
inline double dep_lord_level(double xi, double wealth_at_discovery) noexcept {
  return xi * wealth_at_discovery;
}

// ---------------------------------------------------------------------------
// Rules.

class Lord final : public Rule {
 public:
  explicit Lord(RuleParams params, GammaSequence gamma = GammaSequence::standard());

  std::string_view id() const noexcept override { return "lord"; }
  const RuleParams& params() const noexcept override { return params_; }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan& plan, bool rejected, double wealth_after) override;
  std::unique_ptr<Rule> clone() const override { return std::make_unique<Lord>(*this); }

  [[nodiscard]] std::size_t last_discovery() const noexcept { return tau_; }
  [[nodiscard]] double wealth_at_discovery() const noexcept { return wealth_at_tau_; }
  [[nodiscard]] std::size_t steps_since_discovery() const noexcept { return steps_since_tau_; }
  [[nodiscard]] double level() const noexcept;

 private:
  RuleParams params_;
  GammaSequence gamma_;
  std::size_t step_ = 0;             // tests performed
  std::size_t tau_ = 0;              // index of the last discovery, 0 if none
  double wealth_at_tau_ = 0.0;       // W(tau)
  std::size_t steps_since_tau_ = 1;  // i - tau_i for the next test
};

/// Foster-Stine alpha-investing with levels W/(1 + j - tau_j).
class AlphaInvesting final : public Rule {
 public:
  explicit AlphaInvesting(RuleParams params, bool cap_levels = true);

  std::string_view id() const noexcept override { return "ai"; }
  const RuleParams& params() const noexcept override { return params_; }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan& plan, bool rejected, double wealth_after) override;
  std::unique_ptr<Rule> clone() const override {
    return std::make_unique<AlphaInvesting>(*this);
  }

 private:
  RuleParams params_;
  bool cap_levels_ = true;
  std::size_t steps_since_tau_ = 1;
};

/// Expected-reward-optimal alpha-investing against a simple one-sided
/// alternative. The pay-out is a fixed fraction of current wealth.
class EroAlphaInvesting final : public Rule {
 public:
  struct Options {
    double effect = 2.8;             // shift of the simple alternative, in sd units
    double payout_fraction = 0.1;
    /// Clip psi to phi + b0 so that A1a holds; the unclipped reward
    /// phi/alpha + b0 - 1 exceeds that bound whenever phi > 0.
    bool clip_payoff = true;
  };

  EroAlphaInvesting(RuleParams params, Options options);

  std::string_view id() const noexcept override { return "ero_ai"; }
  const RuleParams& params() const noexcept override { return params_; }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan&, bool, double) override {}
  std::unique_ptr<Rule> clone() const override {
    return std::make_unique<EroAlphaInvesting>(*this);
  }

 private:
  RuleParams params_;
  Options options_;
};

class AlphaSpendingRewards final : public Rule {
 public:
  AlphaSpendingRewards(RuleParams params, double kappa = 1.0, double payout_fraction = 0.1);

  std::string_view id() const noexcept override { return "asr"; }
  const RuleParams& params() const noexcept override { return params_; }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan&, bool, double) override {}
  std::unique_ptr<Rule> clone() const override {
    return std::make_unique<AlphaSpendingRewards>(*this);
  }

 private:
  RuleParams params_;
  double kappa_;
  double payout_fraction_;
};

/// Online Bonferroni, alpha_m = gamma_m alpha. Written as alpha spending:
/// W(0) = alpha, phi_m = alpha_m, psi_m = 0, so its ledger satisfies G1.
class OnlineBonferroni final : public Rule {
 public:
  explicit OnlineBonferroni(RuleParams params, GammaSequence gamma = GammaSequence::standard());

  std::string_view id() const noexcept override { return "bonferroni"; }
  const RuleParams& params() const noexcept override { return params_; }
  double initial_wealth() const noexcept override { return params_.alpha; }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan&, bool, double) override { ++step_; }
  std::unique_ptr<Rule> clone() const override {
    return std::make_unique<OnlineBonferroni>(*this);
  }

 private:
  RuleParams params_;
  GammaSequence gamma_;
  std::size_t step_ = 0;
};

/// Discount sequence xi_i = (alpha/b0) gamma_i / (1 + log i), which makes
/// sum_i xi_i (1 + log i) = alpha/b0.
class DiscountSequence {
 public:
  DiscountSequence(double scale, GammaSequence gamma = GammaSequence::standard());

  [[nodiscard]] double operator()(std::size_t i) const noexcept;
  [[nodiscard]] double scale() const noexcept { return scale_; }

  /// sum_{i<=n} xi_i (1 + log i), plus the analytic tail when n == 0 (full series).
  [[nodiscard]] double budget(std::size_t n = 0) const;

 private:
  double scale_;
  GammaSequence gamma_;
};

/// LORD variant robust to arbitrary dependence: levels discount W(tau_i) by
/// the absolute step index rather than the time since the last discovery.
class DependentLord final : public Rule {
 public:
  explicit DependentLord(RuleParams params, GammaSequence gamma = GammaSequence::standard());

  std::string_view id() const noexcept override { return "dep_lord"; }
  const RuleParams& params() const noexcept override { return params_; }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan& plan, bool rejected, double wealth_after) override;
  std::unique_ptr<Rule> clone() const override { return std::make_unique<DependentLord>(*this); }

  [[nodiscard]] const DiscountSequence& discounts() const noexcept { return xi_; }

  /// The dependent-FDR bound sum_{i<=n} b0 xi_i (1 + log i).
  [[nodiscard]] double fdr_bound(std::size_t n) const;

 private:
  RuleParams params_;
  DiscountSequence xi_;
  std::size_t step_ = 0;
  double wealth_at_tau_ = 0.0;
};

/// LORD with psi = b0 = alpha that stops for good once
///   alpha_{n+1} + sum_{i<=n} alpha_i 1(R_i = 0) > (gamma_fdx - b0 - w0) / (1 - alpha),
/// which with the default w0 = (gamma_fdx - alpha)/2 is (gamma_fdx - alpha) / (2 (1 - alpha)).
class FdxLord final : public Rule {
 public:
  /// Requires alpha < gamma_fdx < 1 and w0 < gamma_fdx - b0; throws ConfigError.
  FdxLord(RuleParams params, double fdx_threshold,
          GammaSequence gamma = GammaSequence::standard());

  /// Parameters with b0 = alpha and w0 = (gamma_fdx - alpha) / 2.
  static RuleParams default_params(double alpha, double fdx_threshold);

  std::string_view id() const noexcept override { return "fdx_lord"; }
  const RuleParams& params() const noexcept override { return inner_.params(); }
  StepPlan plan(double wealth) const override;
  void observe(const StepPlan& plan, bool rejected, double wealth_after) override;
  std::unique_ptr<Rule> clone() const override { return std::make_unique<FdxLord>(*this); }

  [[nodiscard]] double stopping_budget() const noexcept { return budget_; }
  [[nodiscard]] double accumulated() const noexcept { return accumulated_; }
  [[nodiscard]] bool stopped() const noexcept { return stopped_; }
  [[nodiscard]] double fdx_threshold() const noexcept { return fdx_threshold_; }

 private:
  Lord inner_;
  double fdx_threshold_;
  double budget_;
  double accumulated_ = 0.0;  // M(n)
  bool stopped_ = false;
};

// ---------------------------------------------------------------------------
// Construction by identifier.

struct RuleSpec {
  std::string id = "lord";
  RuleParams params{};
  ControlTarget target = ControlTarget::fdr;
  GammaSequence gamma = GammaSequence::standard();
  double kappa = 1.0;             // asr
  double payout_fraction = 0.1;   // asr, ero_ai
  double effect = 2.8;            // ero_ai
  double fdx_threshold = 0.15;    // fdx_lord
  bool cap_levels = true;         // ai; off only to demonstrate the wealth constraint
  bool clip_payoff = true;        // ero_ai
};

/// Identifiers accepted by make_rule, in a stable order.
const std::vector<std::string>& rule_ids();

/// Throws ConfigError on an unknown id or invalid parameters.
std::unique_ptr<Rule> make_rule(const RuleSpec& spec);

RuleFactory rule_factory(RuleSpec spec);

}  // namespace gai
