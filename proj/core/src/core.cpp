#include "gai/core.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "gai/errors.hpp"
#include "gai/random.hpp"

namespace gai {

DecisionHistory::DecisionHistory(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw InputError("decision history entries must be 0 or 1");
    rejections_ += b;
  }
}

void RuleParams::validate(ControlTarget target) const {
  if (!(std::isfinite(w0) && w0 >= 0.0)) throw ConfigError("w0", "must be a finite value >= 0");
  if (!(b0 > 0.0 && b0 <= 1.0)) throw ConfigError("b0", "must lie in (0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (target == ControlTarget::fdr && w0 + b0 > alpha + kConditionTolerance) {
    throw ConfigError("b0", "FDR control requires w0 + b0 <= alpha");
  }
  if (target == ControlTarget::sfdr && b0 > alpha + kConditionTolerance) {
    throw ConfigError("b0", "sFDR/mFDR control requires b0 <= alpha");
  }
}

void WealthLedger::append(double alpha, double phi, double psi, bool rejected,
                          double wealth_after) {
  alpha_.push_back(alpha);
  phi_.push_back(phi);
  psi_.push_back(psi);
  decision_.push_back(rejected ? 1 : 0);
  wealth_.push_back(wealth_after);
}

void WealthLedger::reserve(std::size_t steps) {
  alpha_.reserve(steps);
  phi_.reserve(steps);
  psi_.reserve(steps);
  decision_.reserve(steps);
  wealth_.reserve(steps + 1);
}

void WealthLedger::write_csv(std::ostream& out) const {
  char buf[32];
  const auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  out << "j,alpha,phi,psi,R,W\n";
  if (wealth_.empty()) return;
  out << "0,,,,," << num(wealth_[0]) << '\n';
  for (std::size_t i = 0; i < steps(); ++i) {
    out << i + 1 << ',' << num(alpha_[i]) << ',';
    out << num(phi_[i]) << ',';
    out << num(psi_[i]) << ',' << int{decision_[i]} << ',';
    out << num(wealth_[i + 1]) << '\n';
  }
}

RuleState::RuleState(std::unique_ptr<Rule> rule) : RuleState(std::move(rule), Options{}) {}

RuleState::RuleState(std::unique_ptr<Rule> rule, Options options)
    : rule_(std::move(rule)), options_(options) {
  if (!rule_) throw InputError("RuleState requires a rule");
  wealth_ = rule_->initial_wealth();
  if (options_.record_ledger) ledger_ = WealthLedger(wealth_, rule_->params().b0);
}

RuleState::RuleState(const RuleState& other)
    : rule_(other.rule_->clone()),
      options_(other.options_),
      wealth_(other.wealth_),
      history_(other.history_),
      ledger_(other.ledger_) {}

RuleState& RuleState::operator=(const RuleState& other) {
  if (this != &other) {
    RuleState copy(other);
    *this = std::move(copy);
  }
  return *this;
}

StepPlan RuleState::current_plan() const {
  StepPlan plan = rule_->plan(wealth_);
  if (plan.stopped) plan = StepPlan{0.0, 0.0, 0.0, true};
  return plan;
}

double RuleState::next_level() const {
  return current_plan().alpha;
}

StepOutcome RuleState::advance(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw InputError("p-value must lie in [0, 1]");
  }
  const StepPlan plan = current_plan();
  return commit(plan, plan.alpha > 0.0 && p <= plan.alpha);
}

StepOutcome RuleState::advance_decision(bool rejected) {
  const StepPlan plan = current_plan();
  return commit(plan, rejected && plan.alpha > 0.0);
}

StepOutcome RuleState::commit(const StepPlan& plan, bool rejected) {
  // The only place wealth changes: W(j) = W(j-1) - phi_j + R_j psi_j.
  const double next = wealth_ - plan.phi + (rejected ? plan.psi : 0.0);
  if (options_.enforce_wealth && next < -kConditionTolerance) {
    throw ContractViolation("wealth became negative (" + std::to_string(next) + ") in rule " +
                            std::string(rule_->id()));
  }
  wealth_ = next;
  history_.push_back(rejected);
  if (options_.record_ledger) ledger_.append(plan.alpha, plan.phi, plan.psi, rejected, next);
  rule_->observe(plan, rejected, next);
  return StepOutcome{plan.alpha, rejected, next, plan.stopped};
}

namespace {

template <typename Fn>
void replay_into(RuleState& state, std::span<const double> pvalues, Fn&& on_step) {
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    try {
      on_step(state.advance(pvalues[i]));
    } catch (const InputError& e) {
      throw InputError("p-value at step " + std::to_string(i + 1) + ": " + e.what());
    } catch (const ContractViolation& e) {
      throw ContractViolation("step " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

}  // namespace

ReplayResult replay(const RuleFactory& factory, std::span<const double> pvalues) {
  RuleState state(factory());
  replay_into(state, pvalues, [](const StepOutcome&) {});
  return ReplayResult{state.history(), state.ledger()};
}

DecisionHistory replay_decisions(const RuleFactory& factory, std::span<const double> pvalues) {
  RuleState state(factory(), RuleState::Options{.record_ledger = false, .enforce_wealth = true});
  replay_into(state, pvalues, [](const StepOutcome&) {});
  return state.history();
}

std::vector<Violation> check_g1(const WealthLedger& ledger) {
  std::vector<Violation> out;
  const double b0 = ledger.reward_bound();
  const auto alpha = ledger.alpha();
  const auto phi = ledger.phi();
  const auto psi = ledger.psi();
  const auto wealth = ledger.wealth();
  for (std::size_t i = 0; i < ledger.steps(); ++i) {
    const std::size_t j = i + 1;
    if (psi[i] > phi[i] + b0 + kConditionTolerance) {
      out.push_back({j, "A1a", psi[i], phi[i] + b0});
    }
    if (alpha[i] > 0.0) {
      const double rhs = phi[i] / alpha[i] + b0 - 1.0;
      if (psi[i] > rhs + kConditionTolerance) out.push_back({j, "A1b", psi[i], rhs});
    }
    if (phi[i] > wealth[i] + kConditionTolerance) {
      out.push_back({j, "Nonneg", phi[i], wealth[i]});
    }
  }
  return out;
}

std::vector<Violation> check_g2(const WealthLedger& ledger) {
  std::vector<Violation> out;
  const auto alpha = ledger.alpha();
  const auto wealth = ledger.wealth();
  for (std::size_t i = 0; i < ledger.steps(); ++i) {
    if (wealth[i] <= kConditionTolerance && alpha[i] > kConditionTolerance) {
      out.push_back({i + 1, "G2", alpha[i], 0.0});
    }
  }
  return out;
}

double level_after(const RuleFactory& factory, std::span<const std::uint8_t> history) {
  RuleState state(factory(), RuleState::Options{.record_ledger = false, .enforce_wealth = false});
  for (auto bit : history) state.advance_decision(bit != 0);
  return state.next_level();
}

std::vector<MonotonicityViolation> check_monotone(const RuleFactory& factory, std::size_t horizon,
                                                  std::size_t sample_pairs, std::uint64_t seed) {
  if (horizon < 2) throw InputError("check_monotone requires horizon >= 2");
  std::vector<MonotonicityViolation> out;
  Rng rng(seed);
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> y;
  for (std::size_t s = 0; s < sample_pairs; ++s) {
    const std::size_t j = 2 + rng.below(horizon - 1);
    x.assign(j - 1, 0);
    y.assign(j - 1, 0);
    // Vary the rejection density so both sparse and dense histories appear.
    const double density = rng.uniform();
    const double extra = rng.uniform();
    for (std::size_t k = 0; k + 1 < j; ++k) {
      x[k] = rng.uniform() < density ? 1 : 0;
      y[k] = (x[k] != 0 || rng.uniform() < extra) ? 1 : 0;
    }
    const double lx = level_after(factory, x);
    const double ly = level_after(factory, y);
    if (lx > ly + kConditionTolerance) out.push_back({j, x, y, lx, ly});
  }
  return out;
}

std::vector<MonotonicityViolation> check_monotone_exhaustive(const RuleFactory& factory,
                                                             std::size_t horizon) {
  if (horizon < 2) throw InputError("check_monotone_exhaustive requires horizon >= 2");
  if (horizon > 24) throw InputError("exhaustive monotonicity check limited to horizon <= 24");
  std::vector<MonotonicityViolation> out;
  const RuleState::Options options{.record_ledger = false, .enforce_wealth = false};

  // levels[d][mask]: alpha_{d+1} after the d-bit history `mask` (bit k = R_{k+1}).
  std::vector<std::vector<double>> levels(horizon);
  std::vector<RuleState> frontier;
  frontier.emplace_back(factory(), options);
  for (std::size_t d = 0; d < horizon; ++d) {
    levels[d].resize(frontier.size());
    for (std::size_t mask = 0; mask < frontier.size(); ++mask) {
      levels[d][mask] = frontier[mask].next_level();
    }
    if (d + 1 == horizon) break;
    std::vector<RuleState> next(frontier.size() * 2, RuleState(factory(), options));
    for (std::size_t mask = 0; mask < frontier.size(); ++mask) {
      next[mask] = frontier[mask];
      next[mask].advance_decision(false);
      next[mask | (std::size_t{1} << d)] = frontier[mask];
      next[mask | (std::size_t{1} << d)].advance_decision(true);
    }
    frontier = std::move(next);
  }

  const auto unpack = [](std::size_t mask, std::size_t len) {
    std::vector<std::uint8_t> bits(len);
    for (std::size_t k = 0; k < len; ++k) bits[k] = (mask >> k) & 1U;
    return bits;
  };
  for (std::size_t d = 1; d < horizon; ++d) {
    const auto& lv = levels[d];
    for (std::size_t y = 0; y < lv.size(); ++y) {
      // Enumerate all submasks x of y.
      for (std::size_t x = y;; x = (x - 1) & y) {
        if (lv[x] > lv[y] + kConditionTolerance) {
          out.push_back({d + 1, unpack(x, d), unpack(y, d), lv[x], lv[y]});
        }
        if (x == 0) break;
      }
    }
  }
  return out;
}

}  // namespace gai
