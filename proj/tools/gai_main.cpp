// gai: run experiments, validate rules, compute power bounds, dump gamma tables.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "gai/errors.hpp"

namespace {

using gai::cli::ConfigEntry;

struct RunFlags {
  std::string config;
  bool print_config = false;
  std::optional<std::string> scenario, rules, out, target, gamma, effect, sided, placement;
  std::optional<std::uint64_t> trials, seed, jobs, gamma_horizon, n;
  std::optional<double> alpha, w0, b0, eta, fdx_threshold, pi1, rho;
};

std::string str(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

std::vector<ConfigEntry> flag_entries(const RunFlags& f) {
  std::vector<ConfigEntry> e;
  const auto put = [&](const char* section, const char* key, const auto& opt) {
    if (!opt) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*opt)>, std::string>) {
      e.push_back({section, key, *opt, 0});
    } else if constexpr (std::is_same_v<std::decay_t<decltype(*opt)>, double>) {
      e.push_back({section, key, str(*opt), 0});
    } else {
      e.push_back({section, key, std::to_string(*opt), 0});
    }
  };
  put("", "scenario", f.scenario);
  put("", "rules", f.rules);
  put("", "trials", f.trials);
  put("", "seed", f.seed);
  put("", "jobs", f.jobs);
  put("", "out", f.out);
  put("", "alpha", f.alpha);
  put("", "w0", f.w0);
  put("", "b0", f.b0);
  put("", "eta", f.eta);
  put("", "fdx_threshold", f.fdx_threshold);
  put("", "target", f.target);
  put("", "gamma", f.gamma);
  put("", "gamma_horizon", f.gamma_horizon);
  put("stream", "n", f.n);
  put("stream", "pi1", f.pi1);
  put("stream", "effect", f.effect);
  put("stream", "sided", f.sided);
  put("stream", "placement", f.placement);
  put("stream", "rho", f.rho);
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online FDR control: generalized alpha-investing rules and experiments", "gai"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gai::cli::kVersion));

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run a scenario or an inline stream configuration");
  run->add_option("--config", rf.config, "Config file (or a CSV written by a previous run)");
  run->add_flag("--print-config", rf.print_config,
                "Print the resolved configuration (a template without --config/--scenario)");
  run->add_option("--scenario", rf.scenario, "Named scenario");
  run->add_option("--rules", rf.rules, "Comma-separated procedure labels");
  run->add_option("--trials", rf.trials, "Monte Carlo trials");
  run->add_option("--seed", rf.seed, "Master seed");
  run->add_option("--jobs", rf.jobs, "Worker threads");
  run->add_option("--out", rf.out, "Output directory");
  run->add_option("--alpha", rf.alpha, "Nominal level");
  run->add_option("--w0", rf.w0, "Initial wealth");
  run->add_option("--b0", rf.b0, "Reward bound");
  run->add_option("--eta", rf.eta, "sFDR/mFDR offset (default w0/b0)");
  run->add_option("--fdx-threshold", rf.fdx_threshold, "FDX threshold gamma");
  run->add_option("--target", rf.target, "fdr or sfdr");
  run->add_option("--gamma", rf.gamma, "default, optimal or file:<path>");
  run->add_option("--gamma-horizon", rf.gamma_horizon, "Support of the optimal gamma");
  run->add_option("--n", rf.n, "Inline stream length");
  run->add_option("--pi1", rf.pi1, "Inline non-null fraction");
  run->add_option("--effect", rf.effect, "Inline effect model, e.g. exponential:4");
  run->add_option("--sided", rf.sided, "one or two");
  run->add_option("--placement", rf.placement, "iid, prefix[:k], suffix[:k], lattice:m0, ordered:var");
  run->add_option("--rho", rf.rho, "Equicorrelation of non-null noise");

  gai::cli::ValidateArgs va;
  std::optional<std::string> va_target;
  auto* validate = app.add_subcommand("validate", "Check G1/G2, monotonicity and FDX conditions");
  validate->add_option("rule", va.rule, "Rule identifier")->required();
  validate->add_option("--alpha", va.alpha, "Nominal level");
  validate->add_option("--w0", va.w0, "Initial wealth");
  validate->add_option("--b0", va.b0, "Reward bound");
  validate->add_option("--target", va_target, "fdr or sfdr");
  validate->add_option("--fdx-threshold", va.fdx_threshold, "FDX threshold gamma");
  validate->add_option("--streams", va.streams, "Random streams")->capture_default_str();
  validate->add_option("--horizon", va.horizon, "Stream length")->capture_default_str();
  validate->add_option("--pairs", va.pairs, "Sampled monotonicity pairs")->capture_default_str();
  validate->add_option("--exhaustive", va.exhaustive, "Exhaustive monotonicity length")
      ->capture_default_str();
  validate->add_option("--seed", va.seed, "Seed")->capture_default_str();
  validate->add_flag("--uncapped", va.uncapped)->group("");

  gai::cli::BoundArgs ba;
  std::string bound_out;
  auto* bound = app.add_subcommand("bound", "LORD power bounds and the optimal gamma");
  bound->add_option("--alt", ba.alternative, "gaussian:mu, normal_prior:v, exponential:mean, "
                                             "simple:A or beta:a,b")
      ->capture_default_str();
  bound->add_option("--pi1", ba.pi1, "Non-null fraction")->capture_default_str();
  bound->add_option("--b0", ba.b0, "Reward bound")->capture_default_str();
  bound->add_option("--horizon", ba.horizon, "Support of the optimal gamma")->capture_default_str();
  bound->add_option("--out", bound_out, "Output file (default stdout)");

  gai::cli::GammaArgs ga;
  std::string gamma_out;
  auto* gamma = app.add_subcommand("gamma", "Dump a gamma table");
  gamma->add_option("--kind", ga.kind, "default or optimal")->capture_default_str();
  gamma->add_option("--count", ga.count, "Terms to print")->capture_default_str();
  gamma->add_option("--alt", ga.optimal.alternative, "Alternative for kind=optimal")
      ->capture_default_str();
  gamma->add_option("--pi1", ga.optimal.pi1, "Non-null fraction")->capture_default_str();
  gamma->add_option("--b0", ga.optimal.b0, "Reward bound")->capture_default_str();
  gamma->add_option("--horizon", ga.optimal.horizon, "Support of the optimal gamma")
      ->capture_default_str();
  gamma->add_option("--out", gamma_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gai::cli::kExitConfig;
  }

  const auto with_output = [](const std::string& path, auto&& fn) {
    if (path.empty()) return fn(std::cout);
    std::ofstream file(path);
    if (!file) throw gai::ConfigError("out", "cannot write '" + path + "'");
    return fn(file);
  };

  try {
    if (*run) {
      gai::cli::RunSpec spec;
      if (!rf.config.empty()) gai::cli::apply_entries(spec, gai::cli::parse_config_file(rf.config));
      gai::cli::apply_entries(spec, flag_entries(rf));
      if (rf.print_config) {
        if (rf.config.empty() && !rf.scenario) {
          std::cout << gai::cli::config_template();
        } else {
          (void)gai::cli::resolve(spec);
          for (const auto& line : gai::cli::describe(spec)) std::cout << line << '\n';
        }
        return gai::cli::kExitOk;
      }
      return gai::cli::cmd_run(spec, std::cout, std::cerr);
    }
    if (*validate) {
      if (va_target) {
        if (*va_target == "sfdr") va.target = gai::ControlTarget::sfdr;
        else if (*va_target != "fdr") throw gai::ConfigError("target", "expected fdr or sfdr");
      }
      return gai::cli::cmd_validate(va, std::cout, std::cerr);
    }
    if (*bound) {
      return with_output(bound_out,
                         [&](std::ostream& o) { return gai::cli::cmd_bound(ba, o, std::cerr); });
    }
    if (*gamma) {
      return with_output(gamma_out,
                         [&](std::ostream& o) { return gai::cli::cmd_gamma(ga, o, std::cerr); });
    }
  } catch (const gai::ConfigError& e) {
    std::cerr << "gai: config error: " << e.what() << '\n';
    return gai::cli::kExitConfig;
  } catch (const gai::InputError& e) {
    std::cerr << "gai: input error: " << e.what() << '\n';
    return gai::cli::kExitConfig;
  } catch (const gai::NumericError& e) {
    std::cerr << "gai: numeric failure: " << e.what() << '\n';
    return gai::cli::kExitNumeric;
  } catch (const gai::ContractViolation& e) {
    std::cerr << "gai: rule contract violated: " << e.what() << '\n';
    return gai::cli::kExitViolation;
  }
  return gai::cli::kExitOk;
}
