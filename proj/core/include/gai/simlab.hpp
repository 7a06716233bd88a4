#pragma once

// Stream generators, per-trial metrics, aggregation and the named experiments.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gai/core.hpp"
#include "gai/random.hpp"
#include "gai/rules.hpp"

namespace gai {

// ---------------------------------------------------------------------------
// Streams.

/// Distribution of theta_j for non-null hypotheses.
struct EffectModel {
  enum class Kind { normal_prior, exponential, constant };
  Kind kind = Kind::constant;
  double value = 0.0;  // variance, mean or shift

  static EffectModel normal_prior(double variance) { return {Kind::normal_prior, variance}; }
  static EffectModel exponential(double mean) { return {Kind::exponential, mean}; }
  static EffectModel constant(double shift) { return {Kind::constant, shift}; }

  [[nodiscard]] double sample(Rng& rng) const;
  [[nodiscard]] std::string describe() const;
};

enum class Sidedness { one, two };

struct Placement {
  enum class Kind {
    iid_mixture,        // each hypothesis non-null with probability pi1
    prefix,             // the first k hypotheses are non-null
    suffix,             // the last k hypotheses are non-null
    lattice,            // non-nulls at m0, 2 m0, ... with p = 0
    ordered_side_info,  // iid mixture reordered by a noisy second observation
  };
  Kind kind = Kind::iid_mixture;
  std::size_t count = 0;       // k for prefix/suffix (0: round(pi1 n)); m0 for lattice
  double side_variance = 1.0;  // variance of the side observation noise

  static Placement iid() { return {}; }
  static Placement prefix(std::size_t k = 0) { return {Kind::prefix, k, 1.0}; }
  static Placement suffix(std::size_t k = 0) { return {Kind::suffix, k, 1.0}; }
  static Placement lattice(std::size_t m0) { return {Kind::lattice, m0, 1.0}; }
  static Placement ordered(double side_variance) {
    return {Kind::ordered_side_info, 0, side_variance};
  }
};

struct Dependence {
  enum class Kind { independent, equicorrelated_nonnull };
  Kind kind = Kind::independent;
  double rho = 0.0;

  static Dependence independent() { return {}; }
  static Dependence equicorrelated(double rho) { return {Kind::equicorrelated_nonnull, rho}; }
};

struct StreamConfig {
  std::size_t n = 3000;
  double pi1 = 0.1;
  EffectModel effect = EffectModel::constant(3.0);
  Sidedness sided = Sidedness::one;
  Placement placement{};
  Dependence dependence{};

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Number of non-nulls for fixed placements.
  [[nodiscard]] std::size_t block_size() const;
  /// One-line description, e.g. "n=3000 pi1=0.1 effect=exponential(4) sided=one ...".
  [[nodiscard]] std::string describe() const;
};

struct Stream {
  std::vector<double> pvalues;
  std::vector<double> zscores;      // test statistics; +inf where p = 0 by construction
  std::vector<std::uint8_t> truth;  // 1 = non-null
};

/// Deterministic given (config, seed).
Stream generate_stream(const StreamConfig& config, std::uint64_t seed);

/// (#{q_i <= q}) / n0 over a sorted batch of null scores. Throws InputError when empty.
double empirical_pvalue(std::span<const double> sorted_null_scores, double q);

// ---------------------------------------------------------------------------
// Procedures.

struct OfflineSpec {
  enum class Kind { bh, storey_bh, by, single_step };
  Kind kind = Kind::bh;
  double alpha = 0.05;
  /// Storey lambda; NaN means lambda = alpha.
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double threshold = 3.0;  // single_step t
};

struct ProcedureSpec {
  std::string label;
  std::variant<RuleSpec, OfflineSpec> method;
};

/// Labels: rule identifiers, or bh, storey_bh@0.5, storey_bh@alpha, by, single_step@t.
/// Rule parameters come from `params`; throws ConfigError on unknown labels.
ProcedureSpec procedure_from_label(const std::string& label, const RuleParams& params);

// ---------------------------------------------------------------------------
// Trials and metrics.

struct TrialResult {
  DecisionHistory history;  // kept only when requested
  std::vector<std::uint8_t> truth;
  std::size_t v_count = 0;      // V(n)
  std::size_t r_count = 0;      // R(n)
  std::size_t non_nulls = 0;
  double fdp = 0.0;             // V / (R v 1)
  double max_fdp = 0.0;         // sup_k FDP(k)

  /// True discoveries over non-nulls; NaN without non-nulls.
  [[nodiscard]] double power() const noexcept;
};

/// Applies `procedure` to `stream` and records the metrics in one pass.
TrialResult evaluate(const ProcedureSpec& procedure, const Stream& stream,
                     bool keep_history = false);

/// generate_stream followed by evaluate, keeping the decisions and truth.
TrialResult run_trial(const ProcedureSpec& procedure, const StreamConfig& config,
                      std::uint64_t seed);

struct AggregateMetrics {
  double fdr = 0.0, fdr_se = 0.0;
  double sfdr = 0.0, sfdr_se = 0.0;    // mean V / (R + eta)
  double mfdr = 0.0, mfdr_se = 0.0;    // mean V / (mean R + eta), delta-method se
  double fdx = 0.0, fdx_se = 0.0;      // fraction with sup FDP >= fdx threshold
  double power = 0.0, power_se = 0.0;  // over trials with at least one non-null
  double mean_v = 0.0, mean_r = 0.0;
  std::size_t trials = 0;
  std::size_t power_trials = 0;
};

/// Requires at least two trials (InputError otherwise).
AggregateMetrics aggregate(std::span<const TrialResult> trials, double eta,
                           double fdx_threshold);

// ---------------------------------------------------------------------------
// Experiments.

enum class Metric { fdr, sfdr, mfdr, fdx, power };

const char* metric_name(Metric m) noexcept;

/// value(metric) - slack * se <= upper and value + slack * se >= lower.
struct Expectation {
  std::string cell;       // cell tag; empty matches every cell
  std::string procedure;  // procedure label; empty matches every online rule
  Metric metric = Metric::fdr;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double slack = 3.0;     // multiples of the standard error
  std::string note;
};

struct Cell {
  std::string tag;      // unique within a scenario, e.g. "pi1=0.1"
  std::string variant;  // appended to row labels when non-empty, e.g. "alpha=0.1"
  StreamConfig stream;
  std::vector<ProcedureSpec> procedures;
};

struct Scenario {
  std::string name;
  std::string description;
  std::vector<Cell> cells;
  std::size_t default_trials = 2000;
  double eta = 0.005 / 0.045;  // sFDR/mFDR offset w0/b0
  double fdx_threshold = 0.15;
  std::vector<Expectation> expectations;
};

const std::vector<std::string>& scenario_names();

/// Throws ConfigError("scenario", ...) for unknown names.
Scenario scenario(const std::string& name);

struct ProcedureResult {
  std::string label;
  std::vector<TrialResult> trials;
  AggregateMetrics metrics;
};

struct CellResult {
  std::string tag;
  std::string variant;
  StreamConfig stream;
  std::vector<ProcedureResult> procedures;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
};

struct RunOptions {
  std::size_t trials = 2000;
  std::uint64_t master_seed = 1;
  std::size_t jobs = 1;
  double eta = 0.005 / 0.045;
  double fdx_threshold = 0.15;
};

/// Runs every cell. Trial t of every cell uses the stream seeded by
/// trial_seed(master_seed, t), shared by all procedures of the cell. Results do
/// not depend on `jobs`.
ExperimentResult run_experiment(std::span<const Cell> cells, const RunOptions& options);

struct ExpectationOutcome {
  Expectation expectation;
  std::string cell;
  std::string procedure;
  double value = 0.0;
  double se = 0.0;
  bool passed = false;
};

std::vector<ExpectationOutcome> check_expectations(const Scenario& scenario,
                                                   const ExperimentResult& result);

/// Header `trial,rule,n,pi1,V,R,FDP,maxFDP,power`, preceded by `#!` lines.
void write_trial_csv(std::ostream& out, const ExperimentResult& result,
                     std::span<const std::string> header_lines);

/// Header `rule,pi1,FDR,FDR_se,sFDR,mFDR,FDX,power,power_se,trials`.
void write_aggregate_csv(std::ostream& out, const ExperimentResult& result,
                         std::span<const std::string> header_lines);

/// The procedure label, suffixed with ":<variant>" when the cell has one.
std::string row_label(const CellResult& cell, const ProcedureResult& procedure);

}  // namespace gai
