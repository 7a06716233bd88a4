#pragma once

// Plain-text run configuration: `key = value` lines, `[stream]` and
// `[rule.<id>]` sections, `#` comments. Lines starting with `#!` (the
// provenance header of every CSV the tool writes) are read as config lines, so
// an output file can be passed back with --config to rerun it.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gai/power.hpp"
#include "gai/simlab.hpp"

namespace gai::cli {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigEntry {
  std::string section;  // "" for the top level, "stream", "rule.lord", ...
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Throws ConfigError("config", ...) with the line number on malformed input.
/// When any line starts with `#!`, only those lines are read.
std::vector<ConfigEntry> parse_config(std::istream& in);
std::vector<ConfigEntry> parse_config_file(const std::string& path);

struct RunSpec {
  std::string scenario;  // empty: inline stream below
  StreamConfig stream{};
  bool stream_set = false;  // any [stream] key given
  std::vector<std::string> rules;  // procedure labels; empty keeps the scenario's
  std::size_t trials = 0;          // 0: scenario default, 2000 inline
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out = "gai-out";
  std::optional<double> alpha, w0, b0, eta, fdx_threshold;
  ControlTarget target = ControlTarget::fdr;
  std::string gamma = "default";  // default | optimal | file:<path>
  std::size_t gamma_horizon = 100000;
  std::map<std::string, std::map<std::string, std::string>> rule_options;  // [rule.<id>]
};

/// Applies one entry; throws ConfigError naming the key on unknown keys or bad values.
void apply_entry(RunSpec& spec, const ConfigEntry& entry);
void apply_entries(RunSpec& spec, const std::vector<ConfigEntry>& entries);

/// A fully specified experiment: every field needed to reproduce the output.
struct ResolvedRun {
  std::string scenario;  // empty for inline runs
  std::vector<Cell> cells;
  std::vector<Expectation> expectations;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  double eta = 0.0;
  double fdx_threshold = 0.15;
};

/// Checks parameter consistency and builds the cells. Throws ConfigError
/// (offending field), NumericError (optimal gamma) or InputError (gamma file).
ResolvedRun resolve(const RunSpec& spec);

/// The resolved configuration as config lines, without the `#!` prefix.
/// Excludes jobs and out, which do not affect results.
std::vector<std::string> describe(const RunSpec& spec);

/// The configuration template printed by --print-config, defaults filled in.
std::string config_template();

/// Alternative for optimal gamma and the bound command: "gaussian:3",
/// "normal_prior:16", "exponential:4", "simple:2.8", "beta:0.5,1.5".
AlternativeModel parse_alternative(const std::string& text);

/// The alternative implied by a stream's effect model and sidedness.
AlternativeModel alternative_for(const StreamConfig& stream);

/// Reads a gamma table: one value per line, or CSV rows whose last column is
/// the value; `#` lines and a non-numeric header are skipped.
GammaSequence read_gamma_file(const std::string& path);

}  // namespace gai::cli
