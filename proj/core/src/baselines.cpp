#include "gai/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gai/errors.hpp"

namespace gai {

std::size_t OfflineResult::count() const noexcept {
  return static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
}

namespace {

void check_pvalues(std::span<const double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i]) || p[i] < 0.0 || p[i] > 1.0) {
      throw InputError("p-value at index " + std::to_string(i) + " must lie in [0, 1]");
    }
  }
}

// Step-up at thresholds level * i / N.
OfflineResult step_up(std::span<const double> p, double level) {
  OfflineResult out;
  const std::size_t n = p.size();
  out.rejected.assign(n, 0);
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  const double nd = static_cast<double>(n);
  for (std::size_t i = n; i >= 1; --i) {
    if (p[order[i - 1]] <= level * static_cast<double>(i) / nd) {
      out.threshold_index = i;
      out.cutoff = p[order[i - 1]];
      break;
    }
  }
  if (out.threshold_index == 0) return out;
  for (std::size_t j = 0; j < n; ++j) out.rejected[j] = p[j] <= out.cutoff ? 1 : 0;
  return out;
}

}  // namespace

OfflineResult bh(std::span<const double> pvalues, double alpha) {
  check_pvalues(pvalues);
  return step_up(pvalues, alpha);
}

double storey_factor(std::span<const double> pvalues, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("storey lambda must lie in (0, 1)");
  const auto above = std::count_if(pvalues.begin(), pvalues.end(),
                                   [lambda](double p) { return p > lambda; });
  return (1.0 - lambda) * static_cast<double>(pvalues.size()) /
         (static_cast<double>(above) + 1.0);
}

OfflineResult adaptive_bh(std::span<const double> pvalues, double alpha, double factor) {
  check_pvalues(pvalues);
  return step_up(pvalues, alpha * factor);
}

OfflineResult storey_bh(std::span<const double> pvalues, double alpha, double lambda) {
  return adaptive_bh(pvalues, alpha, storey_factor(pvalues, lambda));
}

OfflineResult by_adjusted_bh(std::span<const double> pvalues, double alpha) {
  check_pvalues(pvalues);
  double harmonic = 0.0;
  for (std::size_t i = pvalues.size(); i >= 1; --i) harmonic += 1.0 / static_cast<double>(i);
  return step_up(pvalues, pvalues.empty() ? alpha : alpha / harmonic);
}

std::vector<std::uint8_t> single_step(std::span<const double> z, double t) {
  std::vector<std::uint8_t> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::fabs(z[i]) >= t ? 1 : 0;
  return out;
}

}  // namespace gai
