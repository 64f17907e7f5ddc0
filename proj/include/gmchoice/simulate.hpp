#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmchoice/assortment.hpp"
#include "gmchoice/chain_core.hpp"
#include "gmchoice/estimation.hpp"
#include "gmchoice/gmnl.hpp"
#include "gmchoice/random.hpp"

namespace gmchoice {

inline constexpr std::int64_t kWalkStepCap = 1'000'000;

struct WalkOutcome {
  int chosen = 0;  // 0 = left without purchase
  std::int64_t steps = 0;
};

// Precomputed cumulative arrival and transition tables for repeated walks on
// one (model, assortment) pair.
class WalkSampler {
 public:
  WalkSampler(const MarkovChainModel& model, const Assortment& s);

  WalkOutcome Sample(RandomStream& rng) const;

 private:
  int Draw(const std::vector<double>& cumulative, RandomStream& rng) const;

  int n_;
  std::vector<char> offered_;
  Vector mu_;
  std::vector<double> arrival_;
  std::vector<std::vector<double>> rows_;
};

WalkOutcome simulate_walk(const MarkovChainModel& model, const Assortment& s, std::uint64_t seed);

// Empirical choice frequencies over 0..n from `walks` walks; walk w uses
// stream w of `seed`, so the counts do not depend on `threads`.
Vector simulate_frequencies(const MarkovChainModel& model, const Assortment& s,
                            std::int64_t walks, std::uint64_t seed, int threads = 1);

class AssortmentSampler {
 public:
  // Uniform over the 2^n - 1 nonempty subsets.
  static AssortmentSampler UniformNonempty(int n);
  // Uniform over subsets of exactly k products.
  static AssortmentSampler FixedSize(int n, int k);

  int n() const { return n_; }
  Assortment Draw(RandomStream& rng) const;

 private:
  AssortmentSampler(int n, int k) : n_(n), k_(k) {}
  int n_;
  int k_;  // 0 = uniform nonempty
};

ChoiceDataset generate_dataset(const MarkovChainModel& model, const Matrix& features,
                               const AssortmentSampler& sampler, std::int64_t t,
                               std::uint64_t seed, int threads = 1);

// Feature-based GMNL with unnormalised attractions w_j = exp(beta^T x_j) as
// the equivalent normalised model v = w / Z with comparison scale alpha Z.
GmnlModel ModelFromParams(const GmnlParams& params, const Matrix& features);

// Choices are drawn from the closed-form GMNL probabilities rather than by
// walking the chain: with a tiny outside attraction and large alpha the
// stopping probabilities are so small that walks run for millions of steps.

ChoiceDataset generate_dataset(const GmnlParams& params, const Matrix& features,
                               const AssortmentSampler& sampler, std::int64_t t,
                               std::uint64_t seed, int threads = 1);

// (n+1) x d synthetic features. Column 0 is an outside-option indicator
// (x_0 = e_1); products carry standard normal attributes in the remaining
// columns and 0 in column 0.
Matrix SyntheticFeatures(int n, int d, std::uint64_t seed);

// Generating coefficients for synthetic studies: slopes 0.5, -0.25, 1/6, ...
// on the product attributes and an outside intercept of -alpha * E[c_t],
// where c_t is the offered attraction under uniform nonempty assortments.
// The intercept keeps no-purchase shares away from 0 and 1 for any alpha.
Vector SyntheticBeta(const Matrix& features, double alpha);

struct NoPurchaseCurve {
  std::vector<double> alphas;
  // values[a][k-1] = pi(0, S) for |S| = k in the homogeneous model with alphas[a].
  std::vector<std::vector<double>> values;
};
NoPurchaseCurve no_purchase_curve(int n, const std::vector<double>& alphas, int kmax);

// Star graph: product 1 is the hub with price p, products 2..n are leaves
// with price P > p. Arrivals are uniform over the n products, the hub moves
// to each leaf and to the no-purchase state with probability 1/n, leaves
// move to the hub and to the no-purchase state with probability 1/2 each.
MarkovChainModel StarChain(int n, double alpha);
std::vector<double> StarPrices(int n, double p, double big_p);

OptimizationResult star_graph_experiment(int n, double p, double big_p, double alpha);

struct StarSweepRow {
  double alpha;
  OptimizationResult result;
  bool hub_only;
};
std::vector<StarSweepRow> star_graph_sweep(int n, double p, double big_p,
                                           const std::vector<double>& alphas);

}  // namespace gmchoice
