#include <cmath>
#include <cstdio>

#include "gai/errors.hpp"
#include "gai/simlab.hpp"

namespace gai {
namespace {

constexpr double kAlpha = 0.05;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

RuleParams fdr_params(double alpha) { return RuleParams{0.1 * alpha, 0.9 * alpha, alpha}; }

ProcedureSpec rule(const std::string& id, const RuleParams& params) {
  return procedure_from_label(id, params);
}

std::vector<ProcedureSpec> procedures(const std::vector<std::string>& labels,
                                      const RuleParams& params) {
  std::vector<ProcedureSpec> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(procedure_from_label(l, params));
  return out;
}

std::string pi_tag(double pi1) { return "pi1=" + fmt(pi1); }

const std::vector<double> kFig1Sweep{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};

Scenario fig1(const std::string& name, EffectModel effect, Sidedness sided, bool with_ero) {
  const std::size_t n = 3000;
  const RuleParams params = fdr_params(kAlpha);
  std::vector<std::string> labels{"lord", "ai", "bonferroni", "bh", "storey_bh@0.5",
                                  "storey_bh@alpha"};
  if (with_ero) labels.insert(labels.begin() + 2, "ero_ai");

  Scenario s;
  s.name = name;
  s.description = "n=3000 stream, non-nulls at random positions, " + effect.describe() +
                  " effects, pi1 sweep; alpha=0.05, w0=0.005, b0=0.045";
  for (double pi1 : kFig1Sweep) {
    Cell cell;
    cell.tag = pi_tag(pi1);
    cell.stream = StreamConfig{n, pi1, effect, sided, Placement::iid(), Dependence::independent()};
    cell.procedures = procedures(labels, params);
    for (auto& p : cell.procedures) {
      if (auto* r = std::get_if<RuleSpec>(&p.method); r && r->id == "ero_ai") {
        r->effect = effect.value;
      }
    }
    s.cells.push_back(std::move(cell));
  }
  s.eta = params.w0 / params.b0;
  s.expectations.push_back({"", "", Metric::fdr, -INFINITY, kAlpha, 3.0,
                            "online rules keep FDR at or below alpha"});
  s.expectations.push_back({"", "", Metric::sfdr, -INFINITY, params.b0, 3.0,
                            "online rules keep sFDR_{w0/b0} at or below b0"});
  s.expectations.push_back({"", "bonferroni", Metric::fdr, -INFINITY, 0.5 * kAlpha, 0.0,
                            "online Bonferroni is conservative"});
  return s;
}

Scenario fig2() {
  const std::size_t n = 3000;
  Scenario s;
  s.name = "fig2_alpha_sweep";
  s.description = "n=3000, pi1=0.2, exponential effects; nominal alpha sweep with b0=0.9 alpha, "
                  "w0=0.1 alpha";
  const EffectModel effect = EffectModel::exponential(std::sqrt(2.0 * std::log(3000.0)));
  for (double alpha : {0.02, 0.05, 0.1, 0.15, 0.2}) {
    Cell cell;
    cell.tag = "alpha=" + fmt(alpha);
    cell.variant = cell.tag;
    cell.stream = StreamConfig{n, 0.2, effect, Sidedness::one, Placement::iid(),
                               Dependence::independent()};
    cell.procedures = procedures({"lord", "ai", "bonferroni", "bh", "storey_bh@0.5",
                                  "storey_bh@alpha"},
                                 fdr_params(alpha));
    s.cells.push_back(std::move(cell));
    s.expectations.push_back({"alpha=" + fmt(alpha), "", Metric::fdr, -INFINITY, alpha, 3.0,
                              "online rules keep FDR at or below alpha"});
  }
  s.eta = 0.1 / 0.9;
  return s;
}

Scenario fig3() {
  const std::size_t n = 3000;
  const RuleParams params = fdr_params(kAlpha);
  const EffectModel effect = EffectModel::exponential(std::sqrt(2.0 * std::log(3000.0)));
  Scenario s;
  s.name = "fig3_ordered";
  s.description = "exponential effects; hypotheses ordered by a second noisy observation "
                  "(variance 1 or 1/2) versus random order";
  for (double pi1 : {0.01, 0.05, 0.1, 0.2, 0.3}) {
    struct Variant {
      const char* name;
      Placement placement;
    };
    for (const auto& v : {Variant{"unordered", Placement::iid()},
                          Variant{"ordered_s2=1", Placement::ordered(1.0)},
                          Variant{"ordered_s2=0.5", Placement::ordered(0.5)}}) {
      Cell cell;
      cell.tag = pi_tag(pi1) + "," + v.name;
      cell.variant = v.name;
      cell.stream = StreamConfig{n, pi1, effect, Sidedness::one, v.placement,
                                 Dependence::independent()};
      cell.procedures = procedures({"lord", "storey_bh@0.5"}, params);
      s.cells.push_back(std::move(cell));
    }
  }
  s.eta = params.w0 / params.b0;
  s.expectations.push_back({"", "lord", Metric::fdr, -INFINITY, kAlpha, 3.0,
                            "LORD keeps FDR at or below alpha in every ordering"});
  return s;
}

// One-sided p-values Phi(-Z), Z ~ N(3, 1) for the non-null prefix.
constexpr Sidedness kTable1Sided = Sidedness::one;

Scenario fdx_table1() {
  const double fdx_gamma = 0.15;
  Scenario s;
  s.name = "fdx_table1";
  s.description = "n=1000, the first pi1*n hypotheses non-null with theta=3; LORD with the "
                  "FDX stopping rule (alpha=0.05, gamma=0.15) and plain LORD";
  s.default_trials = 5000;
  s.fdx_threshold = fdx_gamma;
  const RuleParams fdx_params = FdxLord::default_params(kAlpha, fdx_gamma);
  s.eta = fdx_params.w0 / fdx_params.b0;
  const struct {
    double pi1, fdx, fdr, power;
  } table[] = {{0.005, 0.028, 0.006, 0.666}, {0.01, 0.004, 0.005, 0.699},
               {0.02, 0.000, 0.005, 0.679}, {0.03, 0.000, 0.005, 0.658},
               {0.04, 0.000, 0.005, 0.639}};
  for (const auto& row : table) {
    Cell cell;
    cell.tag = pi_tag(row.pi1);
    cell.stream = StreamConfig{1000, row.pi1, EffectModel::constant(3.0), kTable1Sided,
                               Placement::prefix(), Dependence::independent()};
    ProcedureSpec fdx = rule("fdx_lord", fdx_params);
    std::get<RuleSpec>(fdx.method).fdx_threshold = fdx_gamma;
    cell.procedures.push_back(std::move(fdx));
    cell.procedures.push_back(rule("lord", fdr_params(kAlpha)));
    s.cells.push_back(std::move(cell));
    const std::string tag = pi_tag(row.pi1);
    s.expectations.push_back({tag, "fdx_lord", Metric::fdx, -INFINITY, kAlpha, 3.0,
                              "stopped LORD keeps FDX_gamma at or below alpha"});
    if (row.pi1 <= 0.02) {
      s.expectations.push_back({tag, "fdx_lord", Metric::fdx, row.fdx - 0.02, row.fdx + 0.02,
                                0.0, "published FDX within 0.02"});
      s.expectations.push_back({tag, "fdx_lord", Metric::fdr, row.fdr - 0.005, row.fdr + 0.005,
                                0.0, "published FDR within 0.005"});
      s.expectations.push_back({tag, "fdx_lord", Metric::power, row.power - 0.05,
                                row.power + 0.05, 0.0, "published power within 0.05"});
    }
  }
  return s;
}

Scenario single_step_scenario() {
  const std::size_t n = 3000;
  const std::size_t n0 = 2700;
  Scenario s;
  s.name = "appA_single_step";
  s.description = "n=3000, last 300 hypotheses non-null with theta=2 and equicorrelated noise "
                  "(rho=0.9); single-step rule |X| >= t for t from 2 to 4";
  Cell cell;
  cell.tag = "rho=0.9";
  cell.stream = StreamConfig{n, static_cast<double>(n - n0) / static_cast<double>(n),
                             EffectModel::constant(2.0), Sidedness::two,
                             Placement::suffix(n - n0), Dependence::equicorrelated(0.9)};
  cell.procedures = procedures({"single_step@2", "single_step@2.5", "single_step@3",
                                "single_step@3.5", "single_step@4"},
                               fdr_params(kAlpha));
  s.cells.push_back(std::move(cell));
  s.expectations.push_back({"rho=0.9", "single_step@3", Metric::mfdr, -INFINITY, 0.25, 0.0,
                            "mFDR stays low at t=3"});
  s.expectations.push_back({"rho=0.9", "single_step@3", Metric::fdr, 0.45, INFINITY, 0.0,
                            "FDR is large at t=3"});
  return s;
}

Scenario ai_mfdr_scenario() {
  const std::size_t n = 3000;
  const RuleParams params = fdr_params(kAlpha);
  Scenario s;
  s.name = "appA_ai_mfdr";
  s.description = "n=3000, last pi1*n hypotheses non-null with theta=4 and equicorrelated "
                  "noise (rho=0.9); alpha-investing and dependent LORD";
  s.eta = params.w0 / params.b0;
  const double dep_bound = DependentLord(params).fdr_bound(n);
  for (double pi1 : {0.05, 0.1, 0.2, 0.3}) {
    Cell cell;
    cell.tag = pi_tag(pi1);
    cell.stream = StreamConfig{n, pi1, EffectModel::constant(4.0), Sidedness::two,
                               Placement::suffix(), Dependence::equicorrelated(0.9)};
    cell.procedures = procedures({"ai", "dep_lord"}, params);
    s.cells.push_back(std::move(cell));
  }
  s.expectations.push_back({"", "ai", Metric::fdr, -INFINITY, kAlpha, 3.0,
                            "alpha-investing keeps FDR at or below alpha"});
  s.expectations.push_back({"", "dep_lord", Metric::fdr, -INFINITY, dep_bound, 3.0,
                            "dependent LORD within its general-dependence bound"});
  return s;
}

Scenario lower_bound_scenario() {
  const RuleParams params = fdr_params(kAlpha);
  Scenario s;
  s.name = "appC_lower_bound";
  s.description = "n=20000, non-nulls with p=0 at every 200th position, uniform nulls; LORD";
  s.default_trials = 500;
  s.eta = params.w0 / params.b0;
  Cell cell;
  cell.tag = "m0=200";
  cell.stream = StreamConfig{20000, 1.0 / 200.0, EffectModel::constant(0.0), Sidedness::one,
                             Placement::lattice(200), Dependence::independent()};
  cell.procedures = procedures({"lord"}, params);
  s.cells.push_back(std::move(cell));
  s.expectations.push_back({"m0=200", "lord", Metric::fdr, 0.5 * params.b0,
                            params.b0 + params.w0, 0.0,
                            "adversarial lattice pushes FDR towards b0"});
  return s;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{
      "fig1_gaussian", "fig1_exponential", "fig1_simple",   "fig2_alpha_sweep", "fig3_ordered",
      "fdx_table1",    "appA_single_step", "appA_ai_mfdr", "appC_lower_bound"};
  return names;
}

Scenario scenario(const std::string& name) {
  const double log_n = std::log(3000.0);
  if (name == "fig1_gaussian") {
    return fig1(name, EffectModel::normal_prior(2.0 * log_n), Sidedness::two, false);
  }
  if (name == "fig1_exponential") {
    return fig1(name, EffectModel::exponential(std::sqrt(2.0 * log_n)), Sidedness::one, false);
  }
  if (name == "fig1_simple") {
    return fig1(name, EffectModel::constant(std::sqrt(log_n)), Sidedness::one, true);
  }
  if (name == "fig2_alpha_sweep") return fig2();
  if (name == "fig3_ordered") return fig3();
  if (name == "fdx_table1") return fdx_table1();
  if (name == "appA_single_step") return single_step_scenario();
  if (name == "appA_ai_mfdr") return ai_mfdr_scenario();
  if (name == "appC_lower_bound") return lower_bound_scenario();
  throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

}  // namespace gai
