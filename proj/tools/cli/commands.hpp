#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/config.hpp"

namespace gai::cli {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitViolation = 4;

/// Runs the experiment, writes <out>/trials.csv and <out>/aggregate.csv, and
/// prints one summary line per procedure to `out`. Logs go to `log`.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& log);

struct ValidateArgs {
  std::string rule;
  std::optional<double> alpha, w0, b0;
  ControlTarget target = ControlTarget::fdr;
  double fdx_threshold = 0.15;
  std::size_t streams = 1000;
  std::size_t horizon = 200;
  std::size_t pairs = 1000;
  std::size_t exhaustive = 10;  // exhaustive monotonicity up to this length
  std::uint64_t seed = 1;
  bool uncapped = false;  // ai without the wealth cap on its levels
};

/// G1/G2 on random streams, sampled and exhaustive monotonicity, and for
/// fdx_lord the G3 parameter condition and the stopping rule. Returns
/// kExitViolation when anything fails.
int cmd_validate(const ValidateArgs& options, std::ostream& out, std::ostream& log);

struct BoundArgs {
  std::string alternative = "gaussian:3";
  double pi1 = 0.2;
  double b0 = 0.045;
  std::size_t horizon = 1000;
};

/// CSV `m,gamma_default,gamma_opt,beta_opt`, then a blank line and the summary
/// `exact_bound,surrogate_bound,eta` for the optimal sequence over the horizon.
int cmd_bound(const BoundArgs& options, std::ostream& out, std::ostream& log);

struct GammaArgs {
  std::size_t count = 1000;
  std::string kind = "default";  // default | optimal
  BoundArgs optimal{};        // alternative, pi1, b0, horizon for kind=optimal
};

/// CSV `m,gamma` for the first `count` terms.
int cmd_gamma(const GammaArgs& options, std::ostream& out, std::ostream& log);

}  // namespace gai::cli
