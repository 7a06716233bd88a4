#pragma once

// Generalized alpha-investing: the rule contract, the wealth ledger, and the
// falsification harness for conditions G1/G2 and monotonicity.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gai {

/// Absolute slack used by every condition check on probability-scale quantities.
inline constexpr double kConditionTolerance = 1e-12;

/// Binary decision sequence R_1..R_n (1 = discovery).
class DecisionHistory {
 public:
  DecisionHistory() = default;
  explicit DecisionHistory(std::vector<std::uint8_t> bits);

  void push_back(bool rejected) {
    bits_.push_back(rejected ? 1 : 0);
    rejections_ += rejected ? 1 : 0;
  }

  [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
  [[nodiscard]] bool empty() const noexcept { return bits_.empty(); }
  [[nodiscard]] bool operator[](std::size_t i) const { return bits_[i] != 0; }
  /// R(n), the number of discoveries so far.
  [[nodiscard]] std::size_t rejections() const noexcept { return rejections_; }
  [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const DecisionHistory&, const DecisionHistory&) = default;

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t rejections_ = 0;
};

/// Which guarantee the parameters are meant to deliver.
enum class ControlTarget {
  fdr,   // w0 + b0 <= alpha
  sfdr,  // b0 <= alpha (also covers mFDR)
};

struct RuleParams {
  double w0 = 0.005;     // initial wealth W(0)
  double b0 = 0.045;     // reward bound
  double alpha = 0.05;   // nominal level

  /// Throws ConfigError naming the offending field.
  void validate(ControlTarget target = ControlTarget::fdr) const;
};

/// Per-step trace of W(j), alpha_j, phi_j, psi_j and R_j. Row j of the
/// per-step vectors is step j+1; wealth() has one extra leading entry W(0).
class WealthLedger {
 public:
  WealthLedger() = default;
  WealthLedger(double w0, double b0) : b0_(b0), wealth_{w0} {}

  void append(double alpha, double phi, double psi, bool rejected, double wealth_after);
  void reserve(std::size_t steps);

  [[nodiscard]] std::size_t steps() const noexcept { return alpha_.size(); }
  [[nodiscard]] double reward_bound() const noexcept { return b0_; }
  [[nodiscard]] std::span<const double> wealth() const noexcept { return wealth_; }
  [[nodiscard]] std::span<const double> alpha() const noexcept { return alpha_; }
  [[nodiscard]] std::span<const double> phi() const noexcept { return phi_; }
  [[nodiscard]] std::span<const double> psi() const noexcept { return psi_; }
  [[nodiscard]] std::span<const std::uint8_t> decisions() const noexcept { return decision_; }

  /// CSV with header `j,alpha,phi,psi,R,W`; the j=0 row carries only W.
  /// Floats use 17 significant digits.
  void write_csv(std::ostream& out) const;

 private:
  double b0_ = 0.0;
  std::vector<double> wealth_;
  std::vector<double> alpha_;
  std::vector<double> phi_;
  std::vector<double> psi_;
  std::vector<std::uint8_t> decision_;
};

/// Level, pay-out and pay-off a rule commits to before seeing the next p-value.
struct StepPlan {
  double alpha = 0.0;
  double phi = 0.0;
  double psi = 0.0;
  bool stopped = false;  // the rule has permanently set its levels to zero
};

struct StepOutcome {
  double level = 0.0;
  bool decision = false;
  double wealth_after = 0.0;
  bool stopped = false;
};

/// A generalized alpha-investing rule. Implementations see only their own past
/// decisions and the wealth the driver hands them, never raw p-values.
class Rule {
 public:
  virtual ~Rule() = default;

  [[nodiscard]] virtual std::string_view id() const noexcept = 0;
  [[nodiscard]] virtual const RuleParams& params() const noexcept = 0;
  [[nodiscard]] virtual double initial_wealth() const noexcept { return params().w0; }

  /// Plan for the next test given W(j-1).
  [[nodiscard]] virtual StepPlan plan(double wealth) const = 0;

  /// Record the outcome of the test that used `plan`.
  virtual void observe(const StepPlan& plan, bool rejected, double wealth_after) = 0;

  [[nodiscard]] virtual std::unique_ptr<Rule> clone() const = 0;
};

using RuleFactory = std::function<std::unique_ptr<Rule>()>;

/// Drives one rule over one stream and owns the single wealth-update path.
class RuleState {
 public:
  struct Options {
    bool record_ledger = true;
    /// Throw ContractViolation when wealth drops below -kConditionTolerance.
    /// The validators turn this off so breaches surface as G1 violations.
    bool enforce_wealth = true;
  };

  explicit RuleState(std::unique_ptr<Rule> rule);
  RuleState(std::unique_ptr<Rule> rule, Options options);

  RuleState(const RuleState& other);
  RuleState& operator=(const RuleState& other);
  RuleState(RuleState&&) noexcept = default;
  RuleState& operator=(RuleState&&) noexcept = default;
  ~RuleState() = default;

  /// Tests the next hypothesis: reject iff p <= alpha_j (ties reject) and alpha_j > 0.
  StepOutcome advance(double p);

  /// Applies a prescribed decision, used to evaluate levels along arbitrary
  /// decision histories. A rejection at level zero is recorded as acceptance.
  StepOutcome advance_decision(bool rejected);

  /// Level alpha_j the next call to advance() would test at.
  [[nodiscard]] double next_level() const;

  [[nodiscard]] double wealth() const noexcept { return wealth_; }
  [[nodiscard]] const DecisionHistory& history() const noexcept { return history_; }
  [[nodiscard]] const WealthLedger& ledger() const noexcept { return ledger_; }
  [[nodiscard]] const Rule& rule() const noexcept { return *rule_; }

 private:
  [[nodiscard]] StepPlan current_plan() const;
  StepOutcome commit(const StepPlan& plan, bool rejected);

  std::unique_ptr<Rule> rule_;
  Options options_;
  double wealth_ = 0.0;
  DecisionHistory history_;
  WealthLedger ledger_;
};

struct ReplayResult {
  DecisionHistory history;
  WealthLedger ledger;
};

/// Runs a fresh rule over `pvalues`. Errors are rethrown with the failing index.
ReplayResult replay(const RuleFactory& factory, std::span<const double> pvalues);

/// Decisions only, without a ledger.
DecisionHistory replay_decisions(const RuleFactory& factory, std::span<const double> pvalues);

struct Violation {
  std::size_t index = 0;  // step j (1-based)
  std::string condition;  // "A1a", "A1b", "Nonneg", "G2", ...
  double lhs = 0.0;
  double rhs = 0.0;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Conditions A1a, A1b and Nonneg at every step. When alpha_j = 0 only A1a and
/// Nonneg are checked.
std::vector<Violation> check_g1(const WealthLedger& ledger);

/// W(j-1) <= tolerance implies alpha_j = 0 (within tolerance).
std::vector<Violation> check_g2(const WealthLedger& ledger);

struct MonotonicityViolation {
  std::size_t step = 0;                // j
  std::vector<std::uint8_t> lower;     // x, with x <= y coordinatewise
  std::vector<std::uint8_t> upper;     // y
  double level_lower = 0.0;            // alpha_j(x)
  double level_upper = 0.0;            // alpha_j(y)
};

/// Level alpha_j after the prescribed history (j = history.size() + 1).
double level_after(const RuleFactory& factory, std::span<const std::uint8_t> history);

/// Samples `sample_pairs` random pairs x <= y of lengths j-1 < horizon and
/// reports those with alpha_j(x) > alpha_j(y) + tolerance.
std::vector<MonotonicityViolation> check_monotone(const RuleFactory& factory, std::size_t horizon,
                                                  std::size_t sample_pairs, std::uint64_t seed);

/// Every pair x <= y in {0,1}^{j-1} for all 2 <= j <= horizon.
std::vector<MonotonicityViolation> check_monotone_exhaustive(const RuleFactory& factory,
                                                             std::size_t horizon);

}  // namespace gai
