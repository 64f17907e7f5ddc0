#pragma once

#include <span>
#include <vector>

#include "gmchoice/chain_core.hpp"

namespace gmchoice {

struct Observation {
  Assortment offered;
  int choice = 0;  // 0 = no purchase
};

// Observed choices plus an (n+1) x d feature matrix; row 0 holds the
// no-purchase features x_0.
class ChoiceDataset {
 public:
  ChoiceDataset(int n, Matrix features, std::vector<Observation> observations);

  int n() const { return n_; }
  int d() const { return static_cast<int>(features_.cols()); }
  const Matrix& features() const { return features_; }
  const std::vector<Observation>& observations() const { return observations_; }
  std::size_t size() const { return observations_.size(); }

 private:
  int n_;
  Matrix features_;
  std::vector<Observation> observations_;
};

struct GmnlParams {
  Vector beta;
  double alpha = 0.0;
};

// Evaluation over observations is split into fixed-size blocks whose
// partial sums are added in block order, so results are identical for every
// thread count.
struct EvalOptions {
  int threads = 1;
};

double log_likelihood(const ChoiceDataset& data, const GmnlParams& params,
                      const EvalOptions& options = {});

struct LikelihoodDerivatives {
  double value = 0.0;
  Vector beta_gradient;
  double alpha_derivative = 0.0;
};
LikelihoodDerivatives log_likelihood_with_gradient(const ChoiceDataset& data,
                                                   const GmnlParams& params,
                                                   const EvalOptions& options = {});

// Objective of the one-dimensional alpha problem and its first two
// derivatives at a given alpha for fixed beta.
struct AlphaObjective {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};
AlphaObjective alpha_objective(const ChoiceDataset& data, const Vector& beta, double alpha,
                               const EvalOptions& options = {});

inline constexpr double kDefaultAlphaMax = 50.0;

double solve_partial_alpha(const ChoiceDataset& data, const Vector& beta,
                           double alpha_max = kDefaultAlphaMax, const EvalOptions& options = {});

struct BetaSolveReport {
  Vector beta;
  double log_likelihood = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;  // gradient norm reached the tolerance
};

struct BetaSolveOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  int restarts = 3;  // perturbed restarts on top of the initial point
  std::uint64_t seed = 0x5eed;
  EvalOptions eval;
};

BetaSolveReport solve_partial_beta(const ChoiceDataset& data, double alpha,
                                   const Vector& beta_init, const BetaSolveOptions& options = {});

Vector estimate_mnl(const ChoiceDataset& data, const BetaSolveOptions& options = {});

struct EstimationOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
  double alpha_max = kDefaultAlphaMax;
  // After each alpha/beta sweep, take a Newton step on the profile
  // likelihood in alpha (beta following its ridge), kept only if it raises
  // the likelihood.
  bool extrapolate = true;
  BetaSolveOptions beta;
};

struct EstimationStep {
  int iteration = 0;
  double alpha = 0.0;
  double log_likelihood = 0.0;
};

struct EstimationResult {
  GmnlParams params;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<EstimationStep> trajectory;  // entry 0 is the MNL start
};

EstimationResult estimate_gmnl(const ChoiceDataset& data, const EstimationOptions& options = {});

// Attractions v_j = exp(beta^T x_j) for j = 0..n.
Vector Attractions(const Vector& beta, const Matrix& features);

ChoiceProbabilities predict_choice_probs(const GmnlParams& params, const Matrix& features,
                                         const Assortment& s);

// Rank-based area under the ROC curve; tied scores count one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Pools every (observation, option) pair of the holdout, scoring option
// i in S_t plus the no-purchase option by its predicted probability and
// labelling the chosen option positive.
double holdout_auc(const GmnlParams& params, const ChoiceDataset& holdout);

}  // namespace gmchoice
