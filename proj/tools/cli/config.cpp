#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gai/errors.hpp"
#include "gai/power.hpp"

namespace gai::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& field, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || ptr != end || !std::isfinite(x)) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
  return x;
}

std::uint64_t to_uint(const std::string& field, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(field, "expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + v + "'");
}

// Shortest round-trip representation.
std::string num(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

// "name:a,b" -> {"name", {a, b}}
std::pair<std::string, std::vector<double>> parse_call(const std::string& field,
                                                       const std::string& text) {
  const auto colon = text.find(':');
  std::pair<std::string, std::vector<double>> out{trim(text.substr(0, colon)), {}};
  if (colon != std::string::npos) {
    for (const auto& part : split(text.substr(colon + 1), ',')) {
      out.second.push_back(to_double(field, part));
    }
  }
  return out;
}

EffectModel parse_effect(const std::string& text) {
  const auto [name, args] = parse_call("stream.effect", text);
  if (args.size() != 1) throw ConfigError("stream.effect", "expected <kind>:<value>");
  if (name == "normal_prior") return EffectModel::normal_prior(args[0]);
  if (name == "exponential") return EffectModel::exponential(args[0]);
  if (name == "constant") return EffectModel::constant(args[0]);
  throw ConfigError("stream.effect", "unknown effect model '" + name + "'");
}

std::string effect_text(const EffectModel& e) {
  switch (e.kind) {
    case EffectModel::Kind::normal_prior: return "normal_prior:" + num(e.value);
    case EffectModel::Kind::exponential: return "exponential:" + num(e.value);
    case EffectModel::Kind::constant: return "constant:" + num(e.value);
  }
  return {};
}

Placement parse_placement(const std::string& text) {
  const auto [name, args] = parse_call("stream.placement", text);
  const auto count = [&](bool required) -> std::size_t {
    if (args.empty()) {
      if (required) throw ConfigError("stream.placement", "'" + name + "' needs a count");
      return 0;
    }
    if (args.size() != 1 || args[0] < 0 || args[0] != std::floor(args[0])) {
      throw ConfigError("stream.placement", "expected a non-negative integer count");
    }
    return static_cast<std::size_t>(args[0]);
  };
  if (name == "iid" && args.empty()) return Placement::iid();
  if (name == "prefix") return Placement::prefix(count(false));
  if (name == "suffix") return Placement::suffix(count(false));
  if (name == "lattice") return Placement::lattice(count(true));
  if (name == "ordered" && args.size() == 1) return Placement::ordered(args[0]);
  throw ConfigError("stream.placement", "unknown placement '" + text + "'");
}

std::string placement_text(const Placement& p) {
  switch (p.kind) {
    case Placement::Kind::iid_mixture: return "iid";
    case Placement::Kind::prefix: return p.count ? "prefix:" + std::to_string(p.count) : "prefix";
    case Placement::Kind::suffix: return p.count ? "suffix:" + std::to_string(p.count) : "suffix";
    case Placement::Kind::lattice: return "lattice:" + std::to_string(p.count);
    case Placement::Kind::ordered_side_info: return "ordered:" + num(p.side_variance);
  }
  return {};
}

const std::vector<std::string> kRuleKeys = {"w0",    "b0",     "alpha",         "target",
                                            "kappa", "payout_fraction", "effect",
                                            "fdx_threshold", "cap_levels"};

bool is_online(const std::string& label) {
  const auto& ids = rule_ids();
  return std::find(ids.begin(), ids.end(), label) != ids.end();
}

bool uses_gamma(const std::string& id) {
  return id == "lord" || id == "bonferroni" || id == "dep_lord" || id == "fdx_lord";
}

// Rules whose wealth parameters must be given explicitly in inline runs.
bool needs_wealth(const std::string& id) {
  return id == "lord" || id == "ai" || id == "ero_ai" || id == "asr" || id == "dep_lord";
}

ControlTarget parse_target(const std::string& field, const std::string& v) {
  if (v == "fdr") return ControlTarget::fdr;
  if (v == "sfdr") return ControlTarget::sfdr;
  throw ConfigError(field, "expected fdr or sfdr, got '" + v + "'");
}

void apply_rule_options(RuleSpec& rule, const std::map<std::string, std::string>& opts) {
  const std::string prefix = "rule." + rule.id + ".";
  for (const auto& [key, value] : opts) {
    const std::string field = prefix + key;
    if (key == "w0") rule.params.w0 = to_double(field, value);
    else if (key == "b0") rule.params.b0 = to_double(field, value);
    else if (key == "alpha") rule.params.alpha = to_double(field, value);
    else if (key == "target") rule.target = parse_target(field, value);
    else if (key == "kappa") rule.kappa = to_double(field, value);
    else if (key == "payout_fraction") rule.payout_fraction = to_double(field, value);
    else if (key == "effect") rule.effect = to_double(field, value);
    else if (key == "fdx_threshold") rule.fdx_threshold = to_double(field, value);
    else if (key == "cap_levels") rule.cap_levels = to_bool(field, value);
  }
}

}  // namespace

std::vector<ConfigEntry> parse_config(std::istream& in) {
  std::vector<std::string> lines;
  bool provenance = false;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("#!", 0) == 0) provenance = true;
    lines.push_back(std::move(line));
  }
  std::vector<ConfigEntry> out;
  std::string section;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view raw = lines[i];
    if (provenance) {
      if (raw.rfind("#!", 0) != 0) continue;
      raw.remove_prefix(2);
    }
    std::string line = trim(raw);
    if (!provenance || line.rfind("gai ", 0) != 0) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = trim(line.substr(0, hash));
    } else {
      continue;  // "#! gai <version>" banner
    }
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config", where + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "stream" && section.rfind("rule.", 0) != 0) {
        throw ConfigError("config", where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config", where + ": expected key = value");
    ConfigEntry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), i + 1};
    if (e.key.empty()) throw ConfigError("config", where + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ConfigEntry> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

void apply_entry(RunSpec& spec, const ConfigEntry& e) {
  const std::string& k = e.key;
  const std::string& v = e.value;
  if (e.section.empty()) {
    if (k == "version") return;
    if (k == "scenario") spec.scenario = v;
    else if (k == "rules") {
      spec.rules.clear();
      for (auto& r : split(v, ',')) {
        if (!r.empty()) spec.rules.push_back(r);
      }
    } else if (k == "trials") spec.trials = to_uint(k, v);
    else if (k == "seed") spec.seed = to_uint(k, v);
    else if (k == "jobs") spec.jobs = to_uint(k, v);
    else if (k == "out") spec.out = v;
    else if (k == "alpha") spec.alpha = to_double(k, v);
    else if (k == "w0") spec.w0 = to_double(k, v);
    else if (k == "b0") spec.b0 = to_double(k, v);
    else if (k == "eta") spec.eta = to_double(k, v);
    else if (k == "fdx_threshold") spec.fdx_threshold = to_double(k, v);
    else if (k == "target") spec.target = parse_target(k, v);
    else if (k == "gamma") {
      if (v != "default" && v != "optimal" && v.rfind("file:", 0) != 0) {
        throw ConfigError("gamma", "expected default, optimal or file:<path>");
      }
      spec.gamma = v;
    } else if (k == "gamma_horizon") {
      spec.gamma_horizon = to_uint(k, v);
    } else {
      throw ConfigError(k, "unknown key");
    }
    return;
  }
  if (e.section == "stream") {
    const std::string field = "stream." + k;
    spec.stream_set = true;
    if (k == "n") spec.stream.n = to_uint(field, v);
    else if (k == "pi1") spec.stream.pi1 = to_double(field, v);
    else if (k == "effect") spec.stream.effect = parse_effect(v);
    else if (k == "sided") {
      if (v == "one") spec.stream.sided = Sidedness::one;
      else if (v == "two") spec.stream.sided = Sidedness::two;
      else throw ConfigError(field, "expected one or two");
    } else if (k == "placement") {
      spec.stream.placement = parse_placement(v);
    } else if (k == "rho") {
      const double rho = to_double(field, v);
      spec.stream.dependence = rho == 0.0 ? Dependence::independent() : Dependence::equicorrelated(rho);
    } else {
      throw ConfigError(field, "unknown key");
    }
    return;
  }
  const std::string id = e.section.substr(5);
  if (!is_online(id)) throw ConfigError(e.section, "unknown rule '" + id + "'");
  if (std::find(kRuleKeys.begin(), kRuleKeys.end(), k) == kRuleKeys.end()) {
    throw ConfigError(e.section + "." + k, "unknown key");
  }
  spec.rule_options[id][k] = v;
}

void apply_entries(RunSpec& spec, const std::vector<ConfigEntry>& entries) {
  for (const auto& e : entries) apply_entry(spec, e);
}

AlternativeModel parse_alternative(const std::string& text) {
  const auto [name, args] = parse_call("alt", text);
  const auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ConfigError("alt", "'" + name + "' takes " + std::to_string(n) + " parameter(s)");
    }
  };
  if (name == "gaussian") { need(1); return AlternativeModel::gaussian(args[0]); }
  if (name == "normal_prior") { need(1); return AlternativeModel::normal_prior(args[0]); }
  if (name == "exponential") { need(1); return AlternativeModel::exponential(args[0]); }
  if (name == "simple") { need(1); return AlternativeModel::simple(args[0]); }
  if (name == "beta") { need(2); return AlternativeModel::beta(args[0], args[1]); }
  throw ConfigError("alt", "unknown alternative '" + name + "'");
}

AlternativeModel alternative_for(const StreamConfig& s) {
  const bool two = s.sided == Sidedness::two;
  switch (s.effect.kind) {
    case EffectModel::Kind::normal_prior:
      if (two) return AlternativeModel::normal_prior(s.effect.value);
      break;
    case EffectModel::Kind::exponential:
      if (!two) return AlternativeModel::exponential(s.effect.value);
      break;
    case EffectModel::Kind::constant:
      return two ? AlternativeModel::gaussian(s.effect.value)
                 : AlternativeModel::simple(s.effect.value);
  }
  throw ConfigError("gamma", "no closed-form alternative for " + s.describe());
}

GammaSequence read_gamma_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("gamma", "cannot open gamma file '" + path + "'");
  std::vector<double> values;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::string last = split(line, ',').back();
    double x = 0.0;
    const auto* end = last.data() + last.size();
    const auto [ptr, ec] = std::from_chars(last.data(), end, x);
    if (ec != std::errc{} || ptr != end) {
      if (values.empty()) continue;  // header
      throw InputError(path + ":" + std::to_string(lineno) + ": not a number");
    }
    values.push_back(x);
  }
  return GammaSequence::from_values(std::move(values));
}

ResolvedRun resolve(const RunSpec& spec) {
  ResolvedRun run;
  run.scenario = spec.scenario;
  run.seed = spec.seed;
  if (spec.jobs == 0) throw ConfigError("jobs", "must be >= 1");
  if (spec.alpha && !(*spec.alpha > 0.0 && *spec.alpha < 1.0)) {
    throw ConfigError("alpha", "must lie in (0, 1)");
  }

  Scenario base;
  const bool inline_run = spec.scenario.empty();
  if (inline_run) {
    if (spec.rules.empty()) throw ConfigError("rules", "required without a scenario");
    spec.stream.validate();
    base.name = "inline";
    base.default_trials = 2000;
    Cell cell;
    cell.tag = "pi1=" + num(spec.stream.pi1);
    cell.stream = spec.stream;
    base.cells.push_back(std::move(cell));
    for (const auto& label : spec.rules) {
      if (!is_online(label)) continue;
      if (needs_wealth(label)) {
        const auto& opts = spec.rule_options.count(label) ? spec.rule_options.at(label)
                                                           : std::map<std::string, std::string>{};
        if (!spec.w0 && !opts.count("w0")) throw ConfigError("w0", "required for rule " + label);
        if (!spec.b0 && !opts.count("b0")) throw ConfigError("b0", "required for rule " + label);
      }
    }
  } else {
    if (spec.stream_set) throw ConfigError("stream", "inline stream keys conflict with scenario");
    base = scenario(spec.scenario);
  }
  run.trials = spec.trials ? spec.trials : base.default_trials;
  if (run.trials < 2) throw ConfigError("trials", "must be >= 2");
  run.expectations = base.expectations;

  const double alpha = spec.alpha.value_or(0.05);
  RuleParams global{0.1 * alpha, 0.9 * alpha, alpha};
  if (spec.target == ControlTarget::sfdr) global = {alpha, alpha, alpha};
  if (spec.w0) global.w0 = *spec.w0;
  if (spec.b0) global.b0 = *spec.b0;

  run.fdx_threshold = spec.fdx_threshold.value_or(base.fdx_threshold);
  run.eta = spec.eta.value_or((spec.w0 || spec.b0 || inline_run) ? global.w0 / global.b0
                                                                  : base.eta);
  if (!(run.eta > 0.0)) throw ConfigError("eta", "must be positive");

  std::map<std::size_t, GammaSequence> optimal_cache;
  for (std::size_t ci = 0; ci < base.cells.size(); ++ci) {
    Cell cell = base.cells[ci];
    std::vector<ProcedureSpec> procs;
    if (spec.rules.empty()) {
      procs = cell.procedures;
    } else {
      for (const auto& label : spec.rules) {
        const auto it = std::find_if(cell.procedures.begin(), cell.procedures.end(),
                                     [&](const ProcedureSpec& p) { return p.label == label; });
        procs.push_back(it != cell.procedures.end() ? *it : procedure_from_label(label, global));
      }
    }
    for (auto& proc : procs) {
      if (auto* off = std::get_if<OfflineSpec>(&proc.method)) {
        if (spec.alpha) off->alpha = alpha;
        continue;
      }
      auto& rule = std::get<RuleSpec>(proc.method);
      if (spec.alpha) rule.params.alpha = alpha;
      if (spec.w0) rule.params.w0 = *spec.w0;
      if (spec.b0) rule.params.b0 = *spec.b0;
      if (spec.target == ControlTarget::sfdr) rule.target = ControlTarget::sfdr;
      if (spec.fdx_threshold) rule.fdx_threshold = *spec.fdx_threshold;
      if (rule.id == "fdx_lord" && (spec.alpha || spec.fdx_threshold) && !spec.w0 && !spec.b0) {
        rule.params = FdxLord::default_params(rule.params.alpha, rule.fdx_threshold);
      }
      if (const auto it = spec.rule_options.find(rule.id); it != spec.rule_options.end()) {
        apply_rule_options(rule, it->second);
      }
      if (uses_gamma(rule.id)) {
        if (spec.gamma == "optimal") {
          if (!optimal_cache.count(ci)) {
            if (spec.gamma_horizon == 0) throw ConfigError("gamma_horizon", "must be >= 1");
            const MixtureMarginal G(cell.stream.pi1, alternative_for(cell.stream));
            optimal_cache.emplace(
                ci, optimal_gamma(G, rule.params.b0, spec.gamma_horizon).sequence());
          }
          rule.gamma = optimal_cache.at(ci);
        } else if (spec.gamma.rfind("file:", 0) == 0) {
          rule.gamma = read_gamma_file(spec.gamma.substr(5));
        }
      }
      (void)make_rule(rule);  // parameter checks before any trial
    }
    cell.procedures = std::move(procs);
    run.cells.push_back(std::move(cell));
  }
  for (const auto& [id, opts] : spec.rule_options) {
    (void)opts;
    const bool used = std::any_of(run.cells.begin(), run.cells.end(), [&](const Cell& c) {
      return std::any_of(c.procedures.begin(), c.procedures.end(),
                         [&](const ProcedureSpec& p) { return p.label == id; });
    });
    if (!used) throw ConfigError("rule." + id, "section for a rule that is not run");
  }
  return run;
}

std::vector<std::string> describe(const RunSpec& spec) {
  std::vector<std::string> out;
  out.push_back("version = " + std::string(kVersion));
  if (!spec.scenario.empty()) out.push_back("scenario = " + spec.scenario);
  if (!spec.rules.empty()) {
    std::string joined;
    for (const auto& r : spec.rules) joined += (joined.empty() ? "" : ",") + r;
    out.push_back("rules = " + joined);
  }
  if (spec.trials) out.push_back("trials = " + std::to_string(spec.trials));
  out.push_back("seed = " + std::to_string(spec.seed));
  if (spec.alpha) out.push_back("alpha = " + num(*spec.alpha));
  if (spec.w0) out.push_back("w0 = " + num(*spec.w0));
  if (spec.b0) out.push_back("b0 = " + num(*spec.b0));
  if (spec.eta) out.push_back("eta = " + num(*spec.eta));
  if (spec.fdx_threshold) out.push_back("fdx_threshold = " + num(*spec.fdx_threshold));
  out.push_back(std::string("target = ") +
                (spec.target == ControlTarget::fdr ? "fdr" : "sfdr"));
  out.push_back("gamma = " + spec.gamma);
  if (spec.gamma == "optimal") {
    out.push_back("gamma_horizon = " + std::to_string(spec.gamma_horizon));
  }
  if (spec.scenario.empty()) {
    const auto& s = spec.stream;
    out.push_back("[stream]");
    out.push_back("n = " + std::to_string(s.n));
    out.push_back("pi1 = " + num(s.pi1));
    out.push_back("effect = " + effect_text(s.effect));
    out.push_back(std::string("sided = ") + (s.sided == Sidedness::one ? "one" : "two"));
    out.push_back("placement = " + placement_text(s.placement));
    out.push_back("rho = " + num(s.dependence.rho));
  }
  for (const auto& [id, opts] : spec.rule_options) {
    out.push_back("[rule." + id + "]");
    for (const auto& [k, v] : opts) out.push_back(k + " = " + v);
  }
  return out;
}

std::string config_template() {
  std::ostringstream o;
  o << "# gai run configuration. Keys may also be given on the command line.\n"
       "# Either name a scenario, or describe a stream in [stream] and list rules.\n"
       "#scenario = fig1_gaussian\n"
       "rules = lord,ai,bonferroni,bh     # lord ai ero_ai asr bonferroni dep_lord fdx_lord\n"
       "                                  # bh by storey_bh@<lambda|alpha> single_step@<t>\n"
       "trials = 2000\n"
       "seed = 1\n"
       "jobs = 1\n"
       "out = gai-out\n"
       "alpha = 0.05\n"
       "w0 = 0.005                        # sfdr target: w0 free, b0 = alpha\n"
       "b0 = 0.045\n"
       "target = fdr                      # fdr | sfdr\n"
       "#eta = 0.1111111111111111         # sFDR/mFDR offset, defaults to w0/b0\n"
       "fdx_threshold = 0.15\n"
       "gamma = default                   # default | optimal | file:<path>\n"
       "gamma_horizon = 100000            # support of the optimal sequence\n"
       "\n"
       "[stream]\n"
       "n = 3000\n"
       "pi1 = 0.1\n"
       "effect = exponential:4            # normal_prior:<var> exponential:<mean> constant:<theta>\n"
       "sided = one                       # one | two\n"
       "placement = iid                   # iid prefix[:k] suffix[:k] lattice:<m0> ordered:<var>\n"
       "rho = 0                           # equicorrelated non-null noise\n"
       "\n"
       "# Per-rule overrides: w0 b0 alpha target kappa payout_fraction effect\n"
       "# fdx_threshold cap_levels\n"
       "#[rule.asr]\n"
       "#kappa = 1\n"
       "#payout_fraction = 0.1\n"
       "#[rule.ero_ai]\n"
       "#effect = 2.8\n";
  return o.str();
}

}  // namespace gai::cli
