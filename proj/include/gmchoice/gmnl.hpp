#pragma once

#include <span>

#include "gmchoice/chain_core.hpp"

namespace gmchoice {

// Rank-one specialisation: rho_ij = v_j and lambda = v, with attractions v
// over states 0..n summing to one and all strictly positive.
class GmnlModel {
 public:
  GmnlModel(Vector v, double alpha);

  // v_i = 1/(n+1) for every state.
  static GmnlModel Homogeneous(int n, double alpha);

  int n() const { return static_cast<int>(v_.size()) - 1; }
  const Vector& v() const { return v_; }
  double alpha() const { return alpha_; }

  // The equivalent MarkovChainModel (lambda = v, every rho row equal to v).
  MarkovChainModel ToChain() const;

 private:
  Vector v_;
  double alpha_;
};

// Closed-form choice probabilities for arbitrary positive attractions (not
// necessarily normalised): pi(i,S) = v_i / (sum_S v + v_0 exp(alpha sum_{S+} v)).
// Evaluated in log space so large alpha * sum v cannot overflow.
ChoiceProbabilities AttractionChoiceProbabilities(std::span<const double> v, double alpha,
                                                  const Assortment& s);

double gmnl_choice_probability(const GmnlModel& model, int i, const Assortment& s);
ChoiceProbabilities gmnl_choice_probabilities(const GmnlModel& model, const Assortment& s);

double gmnl_revenue(const GmnlModel& model, const Assortment& s, std::span<const double> prices);

// Attraction of the no-purchase option, v_0 exp(alpha sum_{j in S+} v_j).
double no_purchase_attraction(const GmnlModel& model, const Assortment& s);

// Choice probability under the reciprocal stopping function 1/sum_{S+} v:
// v_i / ((1 + v_0) sum_S v + v_0^2). Zero for i not in S.
double alt_stopping_choice_probability(const GmnlModel& model, int i, const Assortment& s);
double alt_stopping_revenue(const GmnlModel& model, const Assortment& s,
                            std::span<const double> prices);

// Revenue of offering k products in the homogeneous model with common
// price p: k p / (k + exp(alpha (k+1)/(n+1))).
double homogeneous_revenue(int n, double alpha, double price, int k);

// Revenue-maximising cardinality in 1..n for the homogeneous model; ties go
// to the smaller k.
int homogeneous_optimal_cardinality(int n, double alpha, double price = 1.0);

}  // namespace gmchoice
