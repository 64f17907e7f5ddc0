#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "gmchoice/errors.hpp"
#include "gmchoice/simulate.hpp"
#include "support.hpp"

namespace {

using namespace gmchoice;

TEST(RandomStream, StreamsAreReproducibleAndDistinct) {
  RandomStream a(5, 0), b(5, 0), c(5, 1);
  for (int i = 0; i < 100; ++i) {
    const double x = a.Uniform();
    EXPECT_EQ(x, b.Uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  RandomStream d(5, 0);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += d.Uniform() == c.Uniform();
  EXPECT_EQ(same, 0);
  RandomStream e(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(e.Below(7), 7u);
}

TEST(Walk, PointMassArrivalOnOfferedProduct) {
  Vector lambda = Vector::Zero(4);
  lambda[2] = 1.0;
  const Matrix rho = Matrix::Constant(3, 4, 0.25);
  const MarkovChainModel m(lambda, rho, 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const WalkOutcome w = simulate_walk(m, Assortment{2}, seed);
    EXPECT_EQ(w.chosen, 2);
    EXPECT_EQ(w.steps, 0);
  }
}

TEST(Walk, EmptyAssortmentEndsWithoutPurchase) {
  std::mt19937_64 rng(1);
  const MarkovChainModel m = gmtest::RandomChain(rng, 5, 1.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    EXPECT_EQ(simulate_walk(m, Assortment{}, seed).chosen, 0);
}

TEST(Walk, StepCapRaisesNonTermination) {
  Vector lambda(3);
  lambda << 0.0, 0.5, 0.5;
  Matrix rho(2, 3);
  rho << 0.0, 0.0, 1.0, 0.0, 1.0, 0.0;
  const MarkovChainModel m(lambda, rho, 1.0);
  EXPECT_THROW(simulate_walk(m, Assortment{}, 3), NonTermination);
}

TEST(Walk, FrequenciesMatchExactProbabilities) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    const MarkovChainModel m = gmtest::RandomChain(rng, 5, gmtest::Uniform(rng, 0.0, 3.0));
    const Assortment s = Assortment::FromMask(1 + rng() % 31, 5);
    const std::int64_t walks = 200'000;
    const Vector freq = simulate_frequencies(m, s, walks, 100 + trial);
    const Vector exact = gmtest::ChainOracle(m, s);
    for (int i = 0; i <= 5; ++i) {
      const double se = std::sqrt(exact[i] * (1.0 - exact[i]) / walks);
      EXPECT_LE(std::abs(freq[i] - exact[i]), 4.0 * se + 1e-12);
    }
  }
}

TEST(Walk, FrequenciesIndependentOfThreads) {
  std::mt19937_64 rng(3);
  const MarkovChainModel m = gmtest::RandomChain(rng, 6, 1.5);
  const Vector a = simulate_frequencies(m, Assortment{1, 2, 6}, 20'000, 7, 1);
  const Vector b = simulate_frequencies(m, Assortment{1, 2, 6}, 20'000, 7, 4);
  EXPECT_EQ(a, b);
  EXPECT_THROW(simulate_frequencies(m, Assortment{1}, 0, 7), InvalidInput);
}

TEST(AssortmentSampler, FixedSizeAndUniform) {
  RandomStream rng(4);
  const AssortmentSampler fixed = AssortmentSampler::FixedSize(8, 3);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(fixed.Draw(rng).size(), 3);

  // Uniform over nonempty subsets of 3 products: each of the 7 sets about 1/7.
  const AssortmentSampler uniform = AssortmentSampler::UniformNonempty(3);
  std::map<std::vector<int>, int> counts;
  const int draws = 70'000;
  for (int i = 0; i < draws; ++i) {
    const Assortment s = uniform.Draw(rng);
    ASSERT_FALSE(s.empty());
    ++counts[s.members()];
  }
  EXPECT_EQ(counts.size(), 7u);
  for (const auto& [set, count] : counts) EXPECT_NEAR(count / static_cast<double>(draws), 1.0 / 7.0, 0.01);

  EXPECT_THROW(AssortmentSampler::FixedSize(4, 5), InvalidInput);
  EXPECT_THROW(AssortmentSampler::UniformNonempty(63), InvalidInput);
}

TEST(GenerateDataset, DeterministicAcrossThreads) {
  const Matrix x = SyntheticFeatures(8, 3, 5);
  const GmnlParams p{SyntheticBeta(x, 2.0), 2.0};
  const auto sampler = AssortmentSampler::UniformNonempty(8);
  const ChoiceDataset a = generate_dataset(p, x, sampler, 3000, 9, 1);
  const ChoiceDataset b = generate_dataset(p, x, sampler, 3000, 9, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a.observations()[t].offered, b.observations()[t].offered);
    EXPECT_EQ(a.observations()[t].choice, b.observations()[t].choice);
  }
  const ChoiceDataset c = generate_dataset(ModelFromParams(p, x).ToChain(), x, sampler, 500, 9, 1);
  const ChoiceDataset e = generate_dataset(ModelFromParams(p, x).ToChain(), x, sampler, 500, 9, 3);
  for (std::size_t t = 0; t < c.size(); ++t) EXPECT_EQ(c.observations()[t].choice, e.observations()[t].choice);
  EXPECT_THROW(generate_dataset(p, x, sampler, 0, 9), InvalidInput);
}

TEST(GenerateDataset, SingleObservationPointMass) {
  // Everyone arrives at product 1, which is always offered and bought at once.
  Vector lambda = Vector::Zero(3);
  lambda[1] = 1.0;
  const MarkovChainModel m(lambda, Matrix::Constant(2, 3, 1.0 / 3.0), 0.0);
  const ChoiceDataset d =
      generate_dataset(m, Matrix::Zero(3, 1), AssortmentSampler::FixedSize(2, 2), 1, 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.observations()[0].offered, (Assortment{1, 2}));
  EXPECT_EQ(d.observations()[0].choice, 1);
}

TEST(GenerateDataset, NoPurchaseShareMatchesModel) {
  const Matrix x = SyntheticFeatures(10, 4, 6);
  const GmnlParams p{SyntheticBeta(x, 2.0), 2.0};
  const ChoiceDataset d = generate_dataset(p, x, AssortmentSampler::UniformNonempty(10), 40'000, 10);
  double expected = 0.0;
  double variance = 0.0;
  double observed = 0.0;
  for (const Observation& o : d.observations()) {
    const double q = predict_choice_probs(p, x, o.offered).no_purchase();
    expected += q;
    variance += q * (1.0 - q);
    observed += o.choice == 0;
  }
  EXPECT_LE(std::abs(observed - expected), 4.0 * std::sqrt(variance));
  const double share = observed / d.size();
  EXPECT_GT(share, 0.1);
  EXPECT_LT(share, 0.9);
}

TEST(GenerateDataset, WalksAndClosedFormAgree) {
  // Same model, once sampled by walking the chain and once from closed-form
  // probabilities: choice shares on a fixed assortment agree.
  Vector v(5);
  v << 0.3, 0.2, 0.2, 0.15, 0.15;
  const GmnlModel g(v, 1.5);
  const Matrix x = Matrix::Zero(5, 1);
  const auto sampler = AssortmentSampler::FixedSize(4, 4);
  const std::int64_t t = 100'000;
  const ChoiceDataset walked = generate_dataset(g.ToChain(), x, sampler, t, 11);
  const ChoiceProbabilities exact = gmnl_choice_probabilities(g, Assortment{1, 2, 3, 4});
  std::vector<double> share(5, 0.0);
  for (const Observation& o : walked.observations()) share[o.choice] += 1.0 / t;
  for (int i = 0; i <= 4; ++i)
    EXPECT_NEAR(share[i], exact[i], 4.0 * std::sqrt(exact[i] * (1 - exact[i]) / t));
}

TEST(Synthetic, FeaturesAndBeta) {
  const Matrix x = SyntheticFeatures(10, 4, 12);
  ASSERT_EQ(x.rows(), 11);
  ASSERT_EQ(x.cols(), 4);
  EXPECT_EQ(x(0, 0), 1.0);
  for (int c = 1; c < 4; ++c) EXPECT_EQ(x(0, c), 0.0);
  for (int j = 1; j <= 10; ++j) EXPECT_EQ(x(j, 0), 0.0);
  const Vector b = SyntheticBeta(x, 0.0);
  EXPECT_EQ(b[0], 0.0);
  EXPECT_DOUBLE_EQ(b[1], 0.5);
  EXPECT_DOUBLE_EQ(b[2], -0.25);
  EXPECT_LT(SyntheticBeta(x, 2.0)[0], 0.0);
  EXPECT_THROW(SyntheticFeatures(5, 1, 0), InvalidInput);
}

TEST(ModelFromParams, NormalisedModelGivesSameProbabilities) {
  const Matrix x = SyntheticFeatures(6, 3, 13);
  const GmnlParams p{SyntheticBeta(x, 3.0), 3.0};
  const GmnlModel m = ModelFromParams(p, x);
  EXPECT_NEAR(m.v().sum(), 1.0, 1e-12);
  gmtest::ForEachAssortment(6, [&](const Assortment& s) {
    const ChoiceProbabilities a = predict_choice_probs(p, x, s);
    const ChoiceProbabilities b = gmnl_choice_probabilities(m, s);
    for (int i = 0; i <= 6; ++i) ASSERT_NEAR(a[i], b[i], 1e-12);
  });
}

TEST(NoPurchaseCurve, Shapes) {
  const NoPurchaseCurve curve = no_purchase_curve(15, {0.0, 1.0, 10.0}, 15);
  ASSERT_EQ(curve.values.size(), 3u);
  for (const auto& row : curve.values) ASSERT_EQ(row.size(), 15u);
  // MNL: pi(0) = 1/(k+1).
  for (int k = 1; k <= 15; ++k) EXPECT_NEAR(curve.values[0][k - 1], 1.0 / (k + 1), 1e-14);
  for (int k = 1; k < 15; ++k) EXPECT_LE(curve.values[1][k], curve.values[1][k - 1]);
  const auto& big = curve.values[2];
  int argmin = 0;
  for (int k = 1; k < 15; ++k)
    if (big[k] < big[argmin]) argmin = k;
  EXPECT_GT(argmin, 0);
  EXPECT_LT(argmin, 14);
  for (int k = argmin + 1; k < 15; ++k) EXPECT_GT(big[k], big[k - 1]);
  // Independent closed form: e^{a(k+1)/16} / (k + e^{a(k+1)/16}).
  for (int k = 1; k <= 15; ++k) {
    const double e = std::exp(10.0 * (k + 1) / 16.0);
    EXPECT_NEAR(big[k - 1], e / (k + e), 1e-14);
  }
  EXPECT_THROW(no_purchase_curve(15, {1.0}, 16), InvalidInput);
}

TEST(StarGraph, ChainStructure) {
  const MarkovChainModel m = StarChain(10, 2.0);
  EXPECT_EQ(m.lambda()[0], 0.0);
  EXPECT_NEAR(m.rho()(0, 0), 0.1, 1e-15);
  EXPECT_EQ(m.rho()(0, 1), 0.0);
  EXPECT_NEAR(m.rho()(4, 1), 0.5, 1e-15);
  EXPECT_NEAR(m.rho()(4, 0), 0.5, 1e-15);
  EXPECT_THROW(StarPrices(10, 1.0, 0.9), InvalidInput);
}

TEST(StarGraph, HubOnlyForLargeAlpha) {
  const OptimizationResult zero = star_graph_experiment(10, 0.9, 1.0, 0.0);
  for (int j = 2; j <= 10; ++j) EXPECT_TRUE(zero.assortment.contains(j));
  const OptimizationResult nine = star_graph_experiment(10, 0.9, 1.0, 9.0);
  EXPECT_EQ(nine.assortment, Assortment{1});

  const auto rows = star_graph_sweep(10, 0.9, 1.0, {0.0, 1.0, 2.0, 3.0, 5.0, 9.0, 15.0});
  bool seen = false;
  for (const StarSweepRow& r : rows) {
    if (seen) EXPECT_TRUE(r.hub_only) << "alpha " << r.alpha;
    seen = seen || r.hub_only;
  }
  EXPECT_TRUE(seen);
}

}  // namespace
