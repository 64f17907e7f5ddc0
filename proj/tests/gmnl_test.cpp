#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "gmchoice/assortment.hpp"
#include "gmchoice/errors.hpp"
#include "gmchoice/gmnl.hpp"
#include "support.hpp"

namespace {

using namespace gmchoice;

// Rank-one chain built by hand: every row of rho and the arrival vector equal v.
Vector RankOneOracle(const GmnlModel& m, const Assortment& s) {
  const int n = m.n();
  Matrix rho(n, n + 1);
  for (int i = 0; i < n; ++i) rho.row(i) = m.v().transpose();
  return gmtest::AbsorptionOracle(m.v(), rho, gmtest::ExponentialMu(rho, m.alpha(), s));
}

TEST(GmnlModel, Validation) {
  Vector v(3);
  v << 0.5, 0.25, 0.25;
  EXPECT_NO_THROW(GmnlModel(v, 1.0));
  EXPECT_THROW(GmnlModel(v, -1.0), InvalidInput);
  Vector zero = v;
  zero[0] = 0.0;
  zero[1] = 0.75;
  EXPECT_THROW(GmnlModel(zero, 1.0), InvalidInput);
  Vector unnormalised = v * 2.0;
  EXPECT_THROW(GmnlModel(unnormalised, 1.0), InvalidInput);
}

TEST(GmnlChoice, ZeroAlphaIsMnl) {
  const GmnlModel m(Vector::Constant(4, 0.25), 0.0);
  EXPECT_NEAR(gmnl_choice_probability(m, 1, Assortment{1, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(gmnl_choice_probability(m, 0, Assortment{}), 1.0, 1e-15);
  EXPECT_EQ(gmnl_choice_probability(m, 3, Assortment{1, 2}), 0.0);
  EXPECT_THROW(gmnl_choice_probability(m, 4, Assortment{1}), InvalidInput);

  std::mt19937_64 rng(1);
  const GmnlModel r = gmtest::RandomGmnl(rng, 6, 0.0);
  gmtest::ForEachAssortment(6, [&](const Assortment& s) {
    const Vector oracle = gmtest::MnlOracle(r.v(), s);
    const ChoiceProbabilities p = gmnl_choice_probabilities(r, s);
    for (int i = 0; i <= 6; ++i) ASSERT_NEAR(p[i], oracle[i], 1e-14);
  });
}

TEST(GmnlChoice, ClosedFormMatchesChain) {
  const GmnlModel h = GmnlModel::Homogeneous(15, 2.0);
  const Assortment eight = Assortment::FromMask(0xff, 15);
  const Vector oracle = RankOneOracle(h, eight);
  for (int i = 0; i <= 15; ++i) EXPECT_NEAR(gmnl_choice_probability(h, i, eight), oracle[i], 1e-9);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial;
    const GmnlModel m = gmtest::RandomGmnl(rng, n, gmtest::Uniform(rng, 0.0, 10.0));
    gmtest::ForEachAssortment(n, [&](const Assortment& s) {
      const Vector oracle = RankOneOracle(m, s);
      const ChoiceProbabilities p = gmnl_choice_probabilities(m, s);
      for (int i = 0; i <= n; ++i) ASSERT_NEAR(p[i], oracle[i], 1e-9);
    });
  }
}

TEST(GmnlChoice, LargeAlphaStaysFinite) {
  // A unnormalised attraction vector with alpha * sum v far beyond exp's range.
  const std::vector<double> v = {1.0, 50.0, 80.0};
  const ChoiceProbabilities p = AttractionChoiceProbabilities(v, 20.0, Assortment{1, 2});
  EXPECT_TRUE(p.pi.allFinite());
  EXPECT_NEAR(p.no_purchase(), 1.0, 1e-12);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(GmnlRevenue, SumsPriceWeightedProbabilities) {
  std::mt19937_64 rng(3);
  const GmnlModel m = gmtest::RandomGmnl(rng, 7, 3.0);
  const std::vector<double> prices = gmtest::RandomPrices(rng, 7);
  EXPECT_EQ(gmnl_revenue(m, Assortment{}, prices), 0.0);
  const Assortment s{1, 4, 7};
  double expected = 0.0;
  for (int i : s) expected += prices[i - 1] * gmnl_choice_probability(m, i, s);
  EXPECT_NEAR(gmnl_revenue(m, s, prices), expected, 1e-14);
  EXPECT_NEAR(gmnl_revenue(m, s, prices), gmtest::RevenueOracle(RankOneOracle(m, s), prices),
              1e-10);
}

TEST(NoPurchaseAttraction, StrictlyIncreasingUnderInclusion) {
  std::mt19937_64 rng(4);
  const GmnlModel m = gmtest::RandomGmnl(rng, 6, 0.7);
  gmtest::ForEachAssortment(6, [&](const Assortment& s) {
    const double base = no_purchase_attraction(m, s);
    for (int j = 1; j <= 6; ++j) {
      if (s.contains(j)) continue;
      std::vector<int> bigger = s.members();
      bigger.push_back(j);
      ASSERT_GT(no_purchase_attraction(m, Assortment(bigger)), base);
    }
  });
}

TEST(Homogeneous, RevenueFormulaMatchesModel) {
  const GmnlModel h = GmnlModel::Homogeneous(15, 2.0);
  const std::vector<double> prices(15, 1.0);
  for (int k = 0; k <= 15; ++k) {
    const Assortment s = Assortment::FromMask((std::uint64_t{1} << k) - 1, 15);
    EXPECT_NEAR(homogeneous_revenue(15, 2.0, 1.0, k), gmnl_revenue(h, s, prices), 1e-14);
  }
}

TEST(Homogeneous, OptimalCardinality) {
  EXPECT_EQ(homogeneous_optimal_cardinality(15, 2.0), 8);
  EXPECT_EQ(homogeneous_optimal_cardinality(15, 1.0), 15);

  const std::vector<double> prices(15, 1.0);
  const GmnlModel h = GmnlModel::Homogeneous(15, 2.0);
  const OptimizationResult best =
      brute_force_optimal([&](const Assortment& s) { return gmnl_revenue(h, s, prices); }, 15);
  EXPECT_EQ(best.assortment.size(), 8);
}

TEST(Homogeneous, OptimumNextToContinuousStationaryPoint) {
  const int n = 15;
  for (double alpha = 1.1; alpha <= 16.0; alpha += 0.37) {
    const double ratio = (n + 1) / alpha;
    if (ratio < 1.0 || ratio > n) continue;
    int best = 1;
    for (int k = 2; k <= n; ++k)
      if (homogeneous_revenue(n, alpha, 1.0, k) > homogeneous_revenue(n, alpha, 1.0, best)) best = k;
    EXPECT_EQ(homogeneous_optimal_cardinality(n, alpha), best);
    EXPECT_TRUE(best == static_cast<int>(std::floor(ratio)) ||
                best == static_cast<int>(std::ceil(ratio)))
        << "alpha " << alpha << " best " << best;
  }
}

TEST(AltStopping, FormulaAndRatios) {
  Vector v(3);
  v << 0.5, 0.25, 0.25;
  const GmnlModel m(v, 1.0);
  EXPECT_NEAR(alt_stopping_choice_probability(m, 1, Assortment{1, 2}), 0.25, 1e-15);
  EXPECT_EQ(alt_stopping_choice_probability(m, 1, Assortment{2}), 0.0);
  EXPECT_EQ(alt_stopping_choice_probability(m, 1, Assortment{}), 0.0);

  std::mt19937_64 rng(5);
  const GmnlModel r = gmtest::RandomGmnl(rng, 5, 1.0);
  gmtest::ForEachAssortment(5, [&](const Assortment& s) {
    if (!s.contains(2) || !s.contains(4)) return;
    ASSERT_NEAR(alt_stopping_choice_probability(r, 2, s) / alt_stopping_choice_probability(r, 4, s),
                r.v()[2] / r.v()[4], 1e-12);
  });
}

TEST(AltStopping, OptimumIsNestedByPrice) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const GmnlModel m = gmtest::RandomGmnl(rng, 8, 1.0);
    const std::vector<double> prices = gmtest::RandomPrices(rng, 8);
    const OptimizationResult best = brute_force_optimal(
        [&](const Assortment& s) { return alt_stopping_revenue(m, s, prices); }, 8);
    std::vector<int> order(8);
    std::iota(order.begin(), order.end(), 1);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return prices[a - 1] > prices[b - 1]; });
    const std::vector<int> prefix(order.begin(), order.begin() + best.assortment.size());
    EXPECT_EQ(best.assortment, Assortment(prefix)) << "trial " << trial;
  }
}

}  // namespace
