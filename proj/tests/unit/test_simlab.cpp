#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "gai/errors.hpp"
#include "gai/normal.hpp"
#include "gai/random.hpp"
#include "gai/simlab.hpp"

namespace {

using namespace gai;

ProcedureSpec lord_proc() { return procedure_from_label("lord", RuleParams{}); }

double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max({d, (i + 1) / n - x[i], x[i] - i / n});
  }
  return d;
}

TEST(Rng, FixedStreamAndSeedMixing) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.bits(), b.bits());
  // mt19937_64 with the default seed: the 10000th output is fixed by the standard.
  Rng c(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = c.bits();
  EXPECT_EQ(v, 9981545732273789042ULL);
  EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
  EXPECT_EQ(trial_seed(7, 3), trial_seed(7, 3));
}

TEST(Rng, NormalMoments) {
  Rng r(1);
  const int n = 1'000'000;
  long double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(static_cast<double>(s / n), 0.0, 5e-3);
  EXPECT_NEAR(static_cast<double>(s2 / n), 1.0, 5e-3);
}

TEST(Streams, NullPValuesAreUniform) {
  StreamConfig cfg;
  cfg.n = 100000;
  cfg.pi1 = 0.0;
  for (Sidedness sided : {Sidedness::one, Sidedness::two}) {
    cfg.sided = sided;
    const Stream s = generate_stream(cfg, 77);
    EXPECT_EQ(std::accumulate(s.truth.begin(), s.truth.end(), 0), 0);
    EXPECT_LT(ks_uniform(s.pvalues), 1.63 / std::sqrt(100000.0));
  }
}

TEST(Streams, SimpleShiftRejectionRate) {
  const double n_log = 3000.0;
  const double a_shift = std::sqrt(std::log(n_log));
  StreamConfig cfg;
  cfg.n = 200000;
  cfg.pi1 = 1.0;
  cfg.effect = EffectModel::constant(a_shift);
  const Stream s = generate_stream(cfg, 3);
  for (double level : {0.001, 0.01, 0.05}) {
    const double rate =
        std::count_if(s.pvalues.begin(), s.pvalues.end(), [&](double p) { return p <= level; }) /
        static_cast<double>(cfg.n);
    const double expected = normal_cdf(a_shift + normal_quantile(level));
    EXPECT_NEAR(rate, expected, 3 * std::sqrt(expected * (1 - expected) / cfg.n)) << level;
  }
}

TEST(Streams, Lattice) {
  StreamConfig cfg;
  cfg.n = 1000;
  cfg.placement = Placement::lattice(100);
  const Stream s = generate_stream(cfg, 1);
  std::vector<std::size_t> where;
  for (std::size_t j = 0; j < s.truth.size(); ++j) {
    if (s.truth[j]) {
      where.push_back(j + 1);
      EXPECT_EQ(s.pvalues[j], 0.0);
    }
  }
  EXPECT_EQ(where, (std::vector<std::size_t>{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000}));
  cfg.dependence = Dependence::equicorrelated(0.5);
  EXPECT_THROW(generate_stream(cfg, 1), ConfigError);
}

TEST(Streams, PrefixAndSuffixBlocks) {
  StreamConfig cfg;
  cfg.n = 1000;
  cfg.pi1 = 0.02;
  cfg.placement = Placement::prefix();
  Stream s = generate_stream(cfg, 1);
  for (std::size_t j = 0; j < 1000; ++j) ASSERT_EQ(s.truth[j], j < 20 ? 1 : 0);
  cfg.placement = Placement::suffix(30);
  s = generate_stream(cfg, 1);
  for (std::size_t j = 0; j < 1000; ++j) ASSERT_EQ(s.truth[j], j >= 970 ? 1 : 0);
}

TEST(Streams, EquicorrelatedNoise) {
  // Sample correlation of two non-null noises across streams.
  StreamConfig cfg;
  cfg.n = 2;
  cfg.pi1 = 1.0;
  cfg.effect = EffectModel::constant(0.0);
  cfg.placement = Placement::prefix(2);
  cfg.dependence = Dependence::equicorrelated(0.6);
  const int reps = 40000;
  long double sxy = 0, sxx = 0, syy = 0;
  for (int r = 0; r < reps; ++r) {
    const Stream s = generate_stream(cfg, trial_seed(5, r));
    sxy += s.zscores[0] * s.zscores[1];
    sxx += s.zscores[0] * s.zscores[0];
    syy += s.zscores[1] * s.zscores[1];
  }
  EXPECT_NEAR(static_cast<double>(sxy / std::sqrt(sxx * syy)), 0.6, 0.02);
}

TEST(Streams, OrderedBySideInformation) {
  StreamConfig cfg;
  cfg.n = 3000;
  cfg.pi1 = 0.05;
  cfg.effect = EffectModel::exponential(std::sqrt(2 * std::log(3000.0)));
  cfg.placement = Placement::ordered(0.5);
  const Stream s = generate_stream(cfg, 9);
  // Non-nulls concentrate at the front.
  const auto front = std::accumulate(s.truth.begin(), s.truth.begin() + 300, 0);
  const auto back = std::accumulate(s.truth.end() - 300, s.truth.end(), 0);
  EXPECT_GT(front, 5 * std::max(back, 1));
}

TEST(Streams, DeterministicGivenSeed) {
  StreamConfig cfg;
  cfg.effect = EffectModel::normal_prior(2 * std::log(3000.0));
  const Stream a = generate_stream(cfg, 11), b = generate_stream(cfg, 11);
  EXPECT_EQ(a.pvalues, b.pvalues);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_NE(a.pvalues, generate_stream(cfg, 12).pvalues);
}

TEST(Streams, ConfigErrors) {
  StreamConfig cfg;
  cfg.pi1 = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.placement = Placement::prefix(5000);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dependence = Dependence::equicorrelated(1.5);
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(EmpiricalPValue, Examples) {
  const std::vector<double> nulls{0.1, 0.2, 0.3, 0.4};
  EXPECT_DOUBLE_EQ(empirical_pvalue(nulls, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(empirical_pvalue(nulls, 0.05), 0.0);
  EXPECT_DOUBLE_EQ(empirical_pvalue(nulls, 0.4), 1.0);
  EXPECT_THROW(empirical_pvalue(std::vector<double>{}, 0.1), InputError);
}

TEST(Procedures, Labels) {
  const RuleParams p{};
  EXPECT_TRUE(std::holds_alternative<RuleSpec>(procedure_from_label("ai", p).method));
  const auto storey = std::get<OfflineSpec>(procedure_from_label("storey_bh@0.5", p).method);
  EXPECT_EQ(storey.kind, OfflineSpec::Kind::storey_bh);
  EXPECT_DOUBLE_EQ(storey.lambda, 0.5);
  const auto storey_a = std::get<OfflineSpec>(procedure_from_label("storey_bh@alpha", p).method);
  EXPECT_TRUE(std::isnan(storey_a.lambda));
  const auto ss = std::get<OfflineSpec>(procedure_from_label("single_step@2.5", p).method);
  EXPECT_DOUBLE_EQ(ss.threshold, 2.5);
  EXPECT_THROW(procedure_from_label("storey_bh@1.5", p), ConfigError);
  EXPECT_THROW(procedure_from_label("foo", p), ConfigError);
}

TEST(Trials, BonferroniNullFalseDiscoveries) {
  const ProcedureSpec proc = procedure_from_label("bonferroni", RuleParams{});
  StreamConfig cfg;
  cfg.n = 1000;
  cfg.pi1 = 0.0;
  const int reps = 10000;
  long double s = 0, s2 = 0;
  for (int r = 0; r < reps; ++r) {
    const double v = static_cast<double>(run_trial(proc, cfg, trial_seed(3, r)).v_count);
    s += v;
    s2 += v * v;
  }
  const double mean = static_cast<double>(s / reps);
  const double se = std::sqrt(static_cast<double>(s2 / reps) - mean * mean) / std::sqrt(reps);
  // E V <= sum_{m <= n} gamma_m alpha <= alpha.
  EXPECT_LE(mean, 0.05 + 3 * se);
}

TEST(Trials, FdxLordDominatedByLord) {
  const RuleParams p = FdxLord::default_params(0.05, 0.15);
  const ProcedureSpec fdx = procedure_from_label("fdx_lord", p);
  ProcedureSpec lord = procedure_from_label("lord", p);
  std::get<RuleSpec>(lord.method).target = ControlTarget::sfdr;
  StreamConfig cfg;
  cfg.n = 1000;
  cfg.pi1 = 0.05;
  for (std::uint64_t s = 0; s < 300; ++s) {
    EXPECT_LE(run_trial(fdx, cfg, s).r_count, run_trial(lord, cfg, s).r_count);
  }
}

TEST(Trials, AllNonNullAtZero) {
  StreamConfig cfg;
  cfg.n = 500;
  cfg.pi1 = 1.0;
  cfg.effect = EffectModel::constant(60.0);
  const TrialResult t = run_trial(lord_proc(), cfg, 1);
  EXPECT_EQ(t.fdp, 0.0);
  EXPECT_EQ(t.power(), 1.0);
  EXPECT_EQ(t.history.size(), 500u);
}

TEST(Trials, MaxFdpIsRunningSupremum) {
  StreamConfig cfg;
  cfg.n = 2000;
  cfg.pi1 = 0.1;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const TrialResult t = run_trial(procedure_from_label("ai", RuleParams{}), cfg, s);
    std::size_t v = 0, r = 0;
    double sup = 0.0;
    for (std::size_t j = 0; j < t.history.size(); ++j) {
      if (t.history[j]) {
        ++r;
        v += t.truth[j] ? 0 : 1;
        sup = std::max(sup, static_cast<double>(v) / static_cast<double>(r));
      }
    }
    ASSERT_EQ(t.v_count, v);
    ASSERT_EQ(t.r_count, r);
    ASSERT_DOUBLE_EQ(t.max_fdp, sup);
    ASSERT_GE(t.max_fdp, t.fdp);
  }
}

TEST(Aggregate, RepeatedTrialAndTwoPoint) {
  TrialResult t;
  t.v_count = 1;
  t.r_count = 4;
  t.non_nulls = 6;
  t.fdp = 0.25;
  t.max_fdp = 0.5;
  const std::vector<TrialResult> same(5, t);
  const AggregateMetrics m = aggregate(same, 0.1, 0.15);
  EXPECT_DOUBLE_EQ(m.fdr, 0.25);
  EXPECT_EQ(m.fdr_se, 0.0);
  EXPECT_DOUBLE_EQ(m.sfdr, 1.0 / 4.1);
  EXPECT_DOUBLE_EQ(m.mfdr, 1.0 / 4.1);
  EXPECT_DOUBLE_EQ(m.fdx, 1.0);
  EXPECT_DOUBLE_EQ(m.power, 0.5);

  TrialResult zero, one;
  one.v_count = one.r_count = 1;
  one.fdp = one.max_fdp = 1.0;
  const std::vector<TrialResult> pair{zero, one};
  const AggregateMetrics q = aggregate(pair, 0.1, 0.15);
  EXPECT_DOUBLE_EQ(q.fdr, 0.5);
  EXPECT_DOUBLE_EQ(q.fdr_se, 0.5);
  EXPECT_EQ(q.power_trials, 0u);
  EXPECT_THROW(aggregate(std::span(pair).first(1), 0.1, 0.15), InputError);
}

TEST(Aggregate, FdrDominatesSfdrPerTrial) {
  StreamConfig cfg;
  cfg.pi1 = 0.1;
  const double eta = 0.005 / 0.045;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const TrialResult t = run_trial(lord_proc(), cfg, s);
    const double sfdp = static_cast<double>(t.v_count) / (static_cast<double>(t.r_count) + eta);
    ASSERT_GE(t.fdp, sfdp);
  }
}

TEST(Experiment, ResultsIndependentOfJobs) {
  Cell cell;
  cell.tag = "pi1=0.1";
  cell.stream.n = 500;
  cell.procedures = {lord_proc(), procedure_from_label("bh", RuleParams{})};
  const std::vector<Cell> cells{cell};
  RunOptions o;
  o.trials = 101;
  o.master_seed = 5;
  const ExperimentResult a = run_experiment(cells, o);
  o.jobs = 4;
  const ExperimentResult b = run_experiment(cells, o);
  std::ostringstream sa, sb;
  write_trial_csv(sa, a, {});
  write_trial_csv(sb, b, {});
  EXPECT_EQ(sa.str(), sb.str());
  std::ostringstream aa, ab;
  write_aggregate_csv(aa, a, std::vector<std::string>{"x = 1"});
  write_aggregate_csv(ab, b, std::vector<std::string>{"x = 1"});
  EXPECT_EQ(aa.str(), ab.str());
  EXPECT_EQ(aa.str().rfind("#! x = 1\nrule,pi1,FDR,FDR_se,sFDR,mFDR,FDX,power,power_se,trials\n", 0),
            0u);
  EXPECT_EQ(sa.str().rfind("trial,rule,n,pi1,V,R,FDP,maxFDP,power\n", 0), 0u);
}

TEST(Experiment, CommonRandomNumbersAcrossProcedures) {
  // Trial t of every procedure sees the stream seeded by trial_seed(seed, t).
  Cell cell;
  cell.tag = "c";
  cell.stream.n = 300;
  cell.procedures = {lord_proc()};
  RunOptions o;
  o.trials = 3;
  o.master_seed = 21;
  const ExperimentResult r = run_experiment(std::vector<Cell>{cell}, o);
  for (std::size_t t = 0; t < 3; ++t) {
    const TrialResult direct = run_trial(lord_proc(), cell.stream, trial_seed(21, t));
    EXPECT_EQ(r.cells[0].procedures[0].trials[t].r_count, direct.r_count);
    EXPECT_EQ(r.cells[0].procedures[0].trials[t].v_count, direct.v_count);
  }
}

TEST(Scenarios, Catalogue) {
  const std::vector<std::string> expected{"fig1_gaussian",    "fig1_exponential", "fig1_simple",
                                          "fig2_alpha_sweep", "fig3_ordered",     "fdx_table1",
                                          "appA_single_step", "appA_ai_mfdr",     "appC_lower_bound"};
  for (const auto& name : expected) {
    EXPECT_NE(std::find(scenario_names().begin(), scenario_names().end(), name),
              scenario_names().end())
        << name;
    EXPECT_FALSE(scenario(name).cells.empty()) << name;
  }
  EXPECT_THROW(scenario("nope"), ConfigError);
}

TEST(Scenarios, Table1Setup) {
  const Scenario s = scenario("fdx_table1");
  for (const auto& c : s.cells) {
    EXPECT_EQ(c.stream.n, 1000u);
    EXPECT_EQ(c.stream.placement.kind, Placement::Kind::prefix);
    EXPECT_EQ(c.stream.effect.kind, EffectModel::Kind::constant);
    EXPECT_DOUBLE_EQ(c.stream.effect.value, 3.0);
  }
  EXPECT_DOUBLE_EQ(s.fdx_threshold, 0.15);
  const auto& rule = std::get<RuleSpec>(s.cells[0].procedures[0].method);
  EXPECT_DOUBLE_EQ(rule.params.alpha, 0.05);
}

TEST(Scenarios, Figure1Setup) {
  for (const char* name : {"fig1_gaussian", "fig1_exponential", "fig1_simple"}) {
    const Scenario s = scenario(name);
    for (const auto& c : s.cells) {
      EXPECT_EQ(c.stream.n, 3000u) << name;
      for (const auto& p : c.procedures) {
        if (const auto* r = std::get_if<RuleSpec>(&p.method)) {
          EXPECT_DOUBLE_EQ(r->params.alpha, 0.05);
        }
      }
    }
  }
}

}  // namespace
