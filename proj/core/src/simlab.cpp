#include "gai/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "gai/baselines.hpp"
#include "gai/errors.hpp"
#include "gai/normal.hpp"

namespace gai {
namespace {

std::string num(double v, const char* format = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double pvalue_of(double z, Sidedness sided) {
  if (sided == Sidedness::one) return normal_sf(z);
  return std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
}

}  // namespace

double EffectModel::sample(Rng& rng) const {
  switch (kind) {
    case Kind::normal_prior: return std::sqrt(value) * rng.normal();
    case Kind::exponential: return rng.exponential(value);
    case Kind::constant: return value;
  }
  return 0.0;
}

std::string EffectModel::describe() const {
  switch (kind) {
    case Kind::normal_prior: return "normal_prior(" + num(value) + ")";
    case Kind::exponential: return "exponential(" + num(value) + ")";
    case Kind::constant: return "constant(" + num(value) + ")";
  }
  return {};
}

void StreamConfig::validate() const {
  if (n == 0) throw ConfigError("n", "must be >= 1");
  if (!(pi1 >= 0.0 && pi1 <= 1.0)) throw ConfigError("pi1", "must lie in [0, 1]");
  if (!std::isfinite(effect.value)) throw ConfigError("effect", "must be finite");
  if (effect.kind == EffectModel::Kind::normal_prior && effect.value < 0.0) {
    throw ConfigError("effect", "variance must be >= 0");
  }
  if (effect.kind == EffectModel::Kind::exponential && !(effect.value > 0.0)) {
    throw ConfigError("effect", "mean must be positive");
  }
  if (dependence.kind == Dependence::Kind::equicorrelated_nonnull) {
    if (!(dependence.rho >= 0.0 && dependence.rho <= 1.0)) {
      throw ConfigError("rho", "must lie in [0, 1]");
    }
    if (placement.kind == Placement::Kind::lattice ||
        placement.kind == Placement::Kind::ordered_side_info) {
      throw ConfigError("dependence", "correlated noise is not supported with this placement");
    }
  }
  switch (placement.kind) {
    case Placement::Kind::lattice:
      if (placement.count == 0) throw ConfigError("m0", "lattice spacing must be >= 1");
      break;
    case Placement::Kind::prefix:
    case Placement::Kind::suffix:
      if (block_size() > n) throw ConfigError("count", "block larger than the stream");
      break;
    case Placement::Kind::ordered_side_info:
      if (!(placement.side_variance > 0.0) || !std::isfinite(placement.side_variance)) {
        throw ConfigError("side_variance", "must be positive");
      }
      break;
    case Placement::Kind::iid_mixture:
      break;
  }
}

std::size_t StreamConfig::block_size() const {
  switch (placement.kind) {
    case Placement::Kind::prefix:
    case Placement::Kind::suffix:
      return placement.count > 0 ? placement.count
                                 : static_cast<std::size_t>(std::llround(pi1 * static_cast<double>(n)));
    case Placement::Kind::lattice:
      return n / placement.count;
    default:
      return 0;
  }
}

std::string StreamConfig::describe() const {
  std::string s = "n=" + std::to_string(n) + " pi1=" + num(pi1) + " effect=" + effect.describe() +
                  " sided=" + (sided == Sidedness::one ? "one" : "two") + " placement=";
  switch (placement.kind) {
    case Placement::Kind::iid_mixture: s += "iid_mixture"; break;
    case Placement::Kind::prefix: s += "prefix(" + std::to_string(block_size()) + ")"; break;
    case Placement::Kind::suffix: s += "suffix(" + std::to_string(block_size()) + ")"; break;
    case Placement::Kind::lattice: s += "lattice(" + std::to_string(placement.count) + ")"; break;
    case Placement::Kind::ordered_side_info:
      s += "ordered_side_info(" + num(placement.side_variance) + ")";
      break;
  }
  s += " dependence=";
  s += dependence.kind == Dependence::Kind::independent
           ? std::string("independent")
           : "equicorrelated_nonnull(" + num(dependence.rho) + ")";
  return s;
}

Stream generate_stream(const StreamConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t n = config.n;
  Rng rng(seed);
  Stream s;
  s.pvalues.resize(n);
  s.zscores.resize(n);
  s.truth.assign(n, 0);

  if (config.placement.kind == Placement::Kind::lattice) {
    const std::size_t m0 = config.placement.count;
    for (std::size_t j = 0; j < n; ++j) {
      if ((j + 1) % m0 == 0) {
        s.truth[j] = 1;
        s.zscores[j] = std::numeric_limits<double>::infinity();
        s.pvalues[j] = 0.0;
      } else {
        s.zscores[j] = rng.normal();
        s.pvalues[j] = pvalue_of(s.zscores[j], config.sided);
      }
    }
    return s;
  }

  const bool mixture = config.placement.kind == Placement::Kind::iid_mixture ||
                       config.placement.kind == Placement::Kind::ordered_side_info;
  if (!mixture) {
    const std::size_t k = config.block_size();
    if (config.placement.kind == Placement::Kind::prefix) {
      std::fill(s.truth.begin(), s.truth.begin() + static_cast<std::ptrdiff_t>(k), 1);
    } else {
      std::fill(s.truth.end() - static_cast<std::ptrdiff_t>(k), s.truth.end(), 1);
    }
  }
  const bool correlated = config.dependence.kind == Dependence::Kind::equicorrelated_nonnull;
  const double common = correlated ? rng.normal() : 0.0;
  const double shared = std::sqrt(config.dependence.rho);
  const double own = std::sqrt(1.0 - config.dependence.rho);
  const bool ordered = config.placement.kind == Placement::Kind::ordered_side_info;
  const double side_sd = std::sqrt(config.placement.side_variance);
  std::vector<double> side(ordered ? n : 0);

  for (std::size_t j = 0; j < n; ++j) {
    if (mixture) s.truth[j] = rng.uniform() < config.pi1 ? 1 : 0;
    double eps = rng.normal();
    double theta = 0.0;
    if (s.truth[j]) {
      theta = config.effect.sample(rng);
      if (correlated) eps = shared * common + own * eps;
    }
    s.zscores[j] = theta + eps;
    s.pvalues[j] = pvalue_of(s.zscores[j], config.sided);
    if (ordered) side[j] = theta + side_sd * rng.normal();
  }

  if (ordered) {
    // Increasing side p-value, i.e. decreasing side statistic.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return side[a] > side[b]; });
    Stream sorted;
    sorted.pvalues.resize(n);
    sorted.zscores.resize(n);
    sorted.truth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      sorted.pvalues[i] = s.pvalues[order[i]];
      sorted.zscores[i] = s.zscores[order[i]];
      sorted.truth[i] = s.truth[order[i]];
    }
    return sorted;
  }
  return s;
}

double empirical_pvalue(std::span<const double> sorted_null_scores, double q) {
  if (sorted_null_scores.empty()) throw InputError("empirical p-value needs null scores");
  const auto it = std::upper_bound(sorted_null_scores.begin(), sorted_null_scores.end(), q);
  return static_cast<double>(it - sorted_null_scores.begin()) /
         static_cast<double>(sorted_null_scores.size());
}

// ---------------------------------------------------------------------------

ProcedureSpec procedure_from_label(const std::string& label, const RuleParams& params) {
  const auto parse_number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty()) {
      throw ConfigError("rules", "bad numeric suffix in '" + label + "'");
    }
    return v;
  };
  const auto at = label.find('@');
  const std::string head = label.substr(0, at);
  const std::string tail = at == std::string::npos ? "" : label.substr(at + 1);
  OfflineSpec off;
  off.alpha = params.alpha;
  if (head == "bh" && tail.empty()) return {label, off};
  if (head == "by" && tail.empty()) {
    off.kind = OfflineSpec::Kind::by;
    return {label, off};
  }
  if (head == "storey_bh") {
    off.kind = OfflineSpec::Kind::storey_bh;
    if (tail != "alpha") off.lambda = parse_number(tail);
    if (!std::isnan(off.lambda) && !(off.lambda > 0.0 && off.lambda < 1.0)) {
      throw ConfigError("rules", "storey lambda must lie in (0, 1)");
    }
    return {label, off};
  }
  if (head == "single_step") {
    off.kind = OfflineSpec::Kind::single_step;
    off.threshold = parse_number(tail);
    if (!(off.threshold >= 0.0)) throw ConfigError("rules", "single_step threshold must be >= 0");
    return {label, off};
  }
  const auto& ids = rule_ids();
  if (tail.empty() && std::find(ids.begin(), ids.end(), head) != ids.end()) {
    RuleSpec spec;
    spec.id = head;
    spec.params = params;
    return {label, spec};
  }
  throw ConfigError("rules", "unknown procedure '" + label + "'");
}

double TrialResult::power() const noexcept {
  if (non_nulls == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(r_count - v_count) / static_cast<double>(non_nulls);
}

namespace {

class Tally {
 public:
  explicit Tally(const Stream& stream, bool keep) : stream_(stream), keep_(keep) {
    if (keep_) out_.truth = stream.truth;
  }

  void add(std::size_t j, bool rejected) {
    if (rejected) {
      ++out_.r_count;
      if (!stream_.truth[j]) ++out_.v_count;
      const double fdp = static_cast<double>(out_.v_count) / static_cast<double>(out_.r_count);
      out_.max_fdp = std::max(out_.max_fdp, fdp);
    }
    if (keep_) out_.history.push_back(rejected);
  }

  TrialResult finish() {
    for (auto t : stream_.truth) out_.non_nulls += t;
    out_.fdp = static_cast<double>(out_.v_count) /
               static_cast<double>(std::max<std::size_t>(out_.r_count, 1));
    return std::move(out_);
  }

 private:
  const Stream& stream_;
  bool keep_;
  TrialResult out_;
};

}  // namespace

TrialResult evaluate(const ProcedureSpec& procedure, const Stream& stream, bool keep_history) {
  Tally tally(stream, keep_history);
  const std::size_t n = stream.pvalues.size();
  if (const auto* rule = std::get_if<RuleSpec>(&procedure.method)) {
    RuleState state(make_rule(*rule), RuleState::Options{.record_ledger = false,
                                                         .enforce_wealth = true});
    for (std::size_t j = 0; j < n; ++j) tally.add(j, state.advance(stream.pvalues[j]).decision);
    return tally.finish();
  }
  const auto& off = std::get<OfflineSpec>(procedure.method);
  std::vector<std::uint8_t> decisions;
  switch (off.kind) {
    case OfflineSpec::Kind::bh:
      decisions = bh(stream.pvalues, off.alpha).rejected;
      break;
    case OfflineSpec::Kind::storey_bh:
      decisions = storey_bh(stream.pvalues, off.alpha,
                            std::isnan(off.lambda) ? off.alpha : off.lambda)
                      .rejected;
      break;
    case OfflineSpec::Kind::by:
      decisions = by_adjusted_bh(stream.pvalues, off.alpha).rejected;
      break;
    case OfflineSpec::Kind::single_step:
      decisions = single_step(stream.zscores, off.threshold);
      break;
  }
  for (std::size_t j = 0; j < n; ++j) tally.add(j, decisions[j] != 0);
  return tally.finish();
}

TrialResult run_trial(const ProcedureSpec& procedure, const StreamConfig& config,
                      std::uint64_t seed) {
  return evaluate(procedure, generate_stream(config, seed), true);
}

// ---------------------------------------------------------------------------

namespace {

struct Moments {
  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += static_cast<long double>(x) * x;
    ++count;
  }
  [[nodiscard]] double mean() const {
    return count ? static_cast<double>(sum / static_cast<long double>(count)) : 0.0;
  }
  // Sample standard deviation over sqrt(count).
  [[nodiscard]] double se() const {
    if (count < 2) return 0.0;
    const long double c = static_cast<long double>(count);
    const long double var = (sum_sq - sum * sum / c) / (c - 1.0L);
    return var > 0.0L ? static_cast<double>(std::sqrt(var / c)) : 0.0;
  }
};

}  // namespace

AggregateMetrics aggregate(std::span<const TrialResult> trials, double eta,
                           double fdx_threshold) {
  if (trials.size() < 2) throw InputError("aggregate needs at least two trials");
  Moments fdr, sfdr, fdx, power, v, r;
  long double cross = 0.0L;
  for (const auto& t : trials) {
    const double vd = static_cast<double>(t.v_count);
    const double rd = static_cast<double>(t.r_count);
    fdr.add(t.fdp);
    sfdr.add(vd / (rd + eta));
    fdx.add(t.max_fdp >= fdx_threshold ? 1.0 : 0.0);
    v.add(vd);
    r.add(rd);
    cross += static_cast<long double>(vd) * rd;
    if (t.non_nulls > 0) power.add(t.power());
  }
  AggregateMetrics m;
  m.trials = trials.size();
  m.fdr = fdr.mean();
  m.fdr_se = fdr.se();
  m.sfdr = sfdr.mean();
  m.sfdr_se = sfdr.se();
  m.fdx = fdx.mean();
  m.fdx_se = fdx.se();
  m.power = power.mean();
  m.power_se = power.se();
  m.power_trials = power.count;
  m.mean_v = v.mean();
  m.mean_r = r.mean();

  const double denom = m.mean_r + eta;
  m.mfdr = denom > 0.0 ? m.mean_v / denom : 0.0;
  if (denom > 0.0) {
    const double c = static_cast<double>(trials.size());
    const double var_v = std::pow(v.se(), 2) * c;
    const double var_r = std::pow(r.se(), 2) * c;
    const double cov = static_cast<double>((cross - v.sum * r.sum / c) / (c - 1.0));
    const double ratio = m.mfdr;
    const double var = (var_v - 2.0 * ratio * cov + ratio * ratio * var_r) / (denom * denom * c);
    m.mfdr_se = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return m;
}

const char* metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::fdr: return "FDR";
    case Metric::sfdr: return "sFDR";
    case Metric::mfdr: return "mFDR";
    case Metric::fdx: return "FDX";
    case Metric::power: return "power";
  }
  return "?";
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(std::span<const Cell> cells, const RunOptions& options) {
  if (options.trials < 2) throw ConfigError("trials", "must be >= 2");
  for (const auto& cell : cells) {
    cell.stream.validate();
    for (const auto& proc : cell.procedures) {
      if (const auto* rule = std::get_if<RuleSpec>(&proc.method)) make_rule(*rule);
    }
  }

  ExperimentResult result;
  result.cells.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cr = result.cells[c];
    cr.tag = cells[c].tag;
    cr.variant = cells[c].variant;
    cr.stream = cells[c].stream;
    cr.procedures.resize(cells[c].procedures.size());
    for (std::size_t p = 0; p < cells[c].procedures.size(); ++p) {
      cr.procedures[p].label = cells[c].procedures[p].label;
      cr.procedures[p].trials.resize(options.trials);
    }
  }

  const std::size_t tasks = cells.size() * options.trials;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_task = tasks;
  std::exception_ptr error;

  const auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks) return;
      const std::size_t c = k / options.trials;
      const std::size_t t = k % options.trials;
      try {
        const Stream stream = generate_stream(cells[c].stream, trial_seed(options.master_seed, t));
        for (std::size_t p = 0; p < cells[c].procedures.size(); ++p) {
          result.cells[c].procedures[p].trials[t] = evaluate(cells[c].procedures[p], stream);
        }
      } catch (...) {
        // Report the failure of the lowest task index, independent of scheduling.
        std::lock_guard lock(error_mutex);
        if (k < error_task) {
          error_task = k;
          error = std::current_exception();
        }
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, tasks));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  for (auto& cell : result.cells) {
    for (auto& proc : cell.procedures) {
      proc.metrics = aggregate(proc.trials, options.eta, options.fdx_threshold);
    }
  }
  return result;
}

std::vector<ExpectationOutcome> check_expectations(const Scenario& scenario,
                                                   const ExperimentResult& result) {
  std::vector<ExpectationOutcome> out;
  for (const auto& e : scenario.expectations) {
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
      const auto& cell = result.cells[c];
      if (!e.cell.empty() && e.cell != cell.tag) continue;
      for (std::size_t p = 0; p < cell.procedures.size(); ++p) {
        const auto& proc = cell.procedures[p];
        if (e.procedure.empty()) {
          if (c >= scenario.cells.size() || p >= scenario.cells[c].procedures.size() ||
              !std::holds_alternative<RuleSpec>(scenario.cells[c].procedures[p].method)) {
            continue;
          }
        } else if (e.procedure != proc.label) {
          continue;
        }
        const auto& m = proc.metrics;
        double value = 0.0;
        double se = 0.0;
        switch (e.metric) {
          case Metric::fdr: value = m.fdr; se = m.fdr_se; break;
          case Metric::sfdr: value = m.sfdr; se = m.sfdr_se; break;
          case Metric::mfdr: value = m.mfdr; se = m.mfdr_se; break;
          case Metric::fdx: value = m.fdx; se = m.fdx_se; break;
          case Metric::power: value = m.power; se = m.power_se; break;
        }
        ExpectationOutcome o{e, cell.tag, proc.label, value, se, false};
        o.passed = value - e.slack * se <= e.upper && value + e.slack * se >= e.lower;
        out.push_back(std::move(o));
      }
    }
  }
  return out;
}

std::string row_label(const CellResult& cell, const ProcedureResult& procedure) {
  return cell.variant.empty() ? procedure.label : procedure.label + ":" + cell.variant;
}

void write_trial_csv(std::ostream& out, const ExperimentResult& result,
                     std::span<const std::string> header_lines) {
  for (const auto& line : header_lines) out << "#! " << line << '\n';
  out << "trial,rule,n,pi1,V,R,FDP,maxFDP,power\n";
  for (const auto& cell : result.cells) {
    for (const auto& proc : cell.procedures) {
      const std::string label = row_label(cell, proc);
      for (std::size_t t = 0; t < proc.trials.size(); ++t) {
        const auto& tr = proc.trials[t];
        out << t << ',' << label << ',' << cell.stream.n << ',' << num(cell.stream.pi1) << ','
            << tr.v_count << ',' << tr.r_count << ',' << num(tr.fdp, "%.17g") << ','
            << num(tr.max_fdp, "%.17g") << ',';
        if (tr.non_nulls > 0) out << num(tr.power(), "%.17g");
        out << '\n';
      }
    }
  }
}

void write_aggregate_csv(std::ostream& out, const ExperimentResult& result,
                         std::span<const std::string> header_lines) {
  for (const auto& line : header_lines) out << "#! " << line << '\n';
  out << "rule,pi1,FDR,FDR_se,sFDR,mFDR,FDX,power,power_se,trials\n";
  for (const auto& cell : result.cells) {
    for (const auto& proc : cell.procedures) {
      const auto& m = proc.metrics;
      out << row_label(cell, proc) << ',' << num(cell.stream.pi1) << ',' << num(m.fdr) << ','
          << num(m.fdr_se) << ',' << num(m.sfdr) << ',' << num(m.mfdr) << ',' << num(m.fdx)
          << ',' << num(m.power) << ',' << num(m.power_se) << ',' << m.trials << '\n';
    }
  }
}

}  // namespace gai
