#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gai/baselines.hpp"
#include "gai/errors.hpp"
#include "gai/normal.hpp"
#include "gai/random.hpp"

namespace {

using namespace gai;

std::vector<std::size_t> rejected_indices(const OfflineResult& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.rejected.size(); ++i) {
    if (r.rejected[i]) out.push_back(i);
  }
  return out;
}

// Tries every i and keeps the largest with p_(i) <= level i / N.
std::size_t brute_force_ibh(std::vector<double> p, double level) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i <= p.size(); ++i) {
    if (p[i - 1] <= level * static_cast<double>(i) / n) best = i;
  }
  return best;
}

TEST(Bh, HandExample) {
  const std::vector<double> p{0.01, 0.02, 0.9};
  const OfflineResult r = bh(p, 0.05);
  EXPECT_EQ(r.threshold_index, 2u);
  EXPECT_EQ(rejected_indices(r), (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(r.cutoff, 0.02);
}

TEST(Bh, Extremes) {
  EXPECT_EQ(bh(std::vector<double>(10, 1.0), 0.05).count(), 0u);
  EXPECT_EQ(bh(std::vector<double>(10, 0.0), 0.05).count(), 10u);
  EXPECT_EQ(bh(std::vector<double>{}, 0.05).count(), 0u);
}

TEST(Bh, RejectsInvalid) {
  EXPECT_THROW(bh(std::vector<double>{0.1, NAN}, 0.05), InputError);
  EXPECT_THROW(bh(std::vector<double>{1.1}, 0.05), InputError);
}

TEST(Bh, TiesAtCutoffAllRejected) {
  const std::vector<double> p{0.02, 0.02, 0.02, 0.5};
  EXPECT_EQ(bh(p, 0.1).count(), 3u);
}

TEST(Bh, BruteForceOracle) {
  Rng rng(8);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<double> p(n);
    for (double& x : p) {
      // Mix of tiny, moderate and coarse values, with occasional ties.
      const double u = rng.uniform();
      x = rng.below(4) == 0 ? std::round(u * 20) / 20 : u * u * u;
    }
    const OfflineResult r = bh(p, 0.2);
    ASSERT_EQ(r.threshold_index, brute_force_ibh(p, 0.2)) << t;
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    const double cut = r.threshold_index ? sorted[r.threshold_index - 1] : -1.0;
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(r.rejected[i] != 0, p[i] <= cut);
  }
}

TEST(Bh, PermutationInvariantAndDownSet) {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(50);
    for (double& x : p) x = std::pow(rng.uniform(), 3.0);
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[perm[i]];
    const OfflineResult a = bh(p, 0.1), b = bh(q, 0.1);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(b.rejected[i], a.rejected[perm[i]]);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (a.rejected[i] && p[k] <= p[i]) ASSERT_TRUE(a.rejected[k]);
      }
    }
  }
}

TEST(Storey, Factor) {
  const std::vector<double> p{0.01, 0.02, 0.9};
  EXPECT_DOUBLE_EQ(storey_factor(p, 0.5), 0.75);
  const std::vector<double> high{0.6, 0.7, 0.8, 0.9};
  EXPECT_DOUBLE_EQ(storey_factor(high, 0.5), 0.5 * 4 / 5);
  const std::vector<double> low{0.1, 0.2, 0.3};
  EXPECT_DOUBLE_EQ(storey_factor(low, 0.5), 0.5 * 3);
}

TEST(Storey, ThresholdsScaledByFactor) {
  const std::vector<double> p{0.01, 0.02, 0.9};
  // Factor 0.75. BH at 0.035 has thresholds (0.0117, 0.0233, 0.035) and takes two;
  // scaled, they become (0.00875, 0.0175, 0.02625) and take none.
  EXPECT_EQ(bh(p, 0.035).threshold_index, 2u);
  EXPECT_EQ(storey_bh(p, 0.035, 0.5).threshold_index, 0u);
  EXPECT_EQ(storey_bh(p, 0.05, 0.5).threshold_index, 2u);
  const OfflineResult same = adaptive_bh(p, 0.05, 1.0);
  EXPECT_EQ(same.rejected, bh(p, 0.05).rejected);
}

TEST(Storey, UnitFactorEqualsBh) {
  Rng rng(10);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> p(30);
    for (double& x : p) x = std::pow(rng.uniform(), 4.0);
    EXPECT_EQ(adaptive_bh(p, 0.1, 1.0).rejected, bh(p, 0.1).rejected);
  }
}

TEST(By, Examples) {
  const std::vector<double> one{0.04};
  EXPECT_EQ(by_adjusted_bh(one, 0.05).rejected, bh(one, 0.05).rejected);
  const std::vector<double> p{0.01, 0.02, 0.9};
  EXPECT_EQ(by_adjusted_bh(p, 0.05).rejected, bh(p, 0.05 * 6.0 / 11.0).rejected);
  Rng rng(11);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> q(40);
    for (double& x : q) x = std::pow(rng.uniform(), 5.0);
    const OfflineResult a = by_adjusted_bh(q, 0.1), b = bh(q, 0.1);
    for (std::size_t i = 0; i < q.size(); ++i) ASSERT_LE(a.rejected[i], b.rejected[i]);
  }
}

TEST(SingleStep, Examples) {
  EXPECT_EQ(single_step(std::vector<double>{0.0, 5.0}, 3.0), (std::vector<std::uint8_t>{0, 1}));
  EXPECT_EQ(single_step(std::vector<double>{-4.0, 2.9}, 3.0), (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(single_step(std::vector<double>{0.0, -1.0, 2.0}, 0.0),
            (std::vector<std::uint8_t>{1, 1, 1}));
}

TEST(SingleStep, NullRejectionRate) {
  Rng rng(12);
  const std::size_t n = 1'000'000;
  std::vector<double> z(n);
  for (double& x : z) x = rng.normal();
  const auto d = single_step(z, 2.0);
  const double rate = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  const double expected = 2 * normal_cdf(-2.0);
  EXPECT_NEAR(rate, expected, 3 * std::sqrt(expected * (1 - expected) / n));
}

}  // namespace
