#include "gmchoice/gmnl.hpp"

#include <cmath>
#include <string>

#include "gmchoice/errors.hpp"

namespace gmchoice {

GmnlModel::GmnlModel(Vector v, double alpha) : v_(std::move(v)), alpha_(alpha) {
  if (v_.size() < 2) throw InvalidInput("GMNL model needs v_0 plus at least one product");
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (!(v_[i] > 0.0) || !std::isfinite(v_[i])) {
      throw InvalidInput("attraction v_" + std::to_string(i) + " must be strictly positive");
    }
  }
  if (std::abs(v_.sum() - 1.0) > 1e-12) throw InvalidInput("attractions must sum to 1");
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw InvalidInput("alpha must be finite and nonnegative");
  }
}

GmnlModel GmnlModel::Homogeneous(int n, double alpha) {
  if (n < 1) throw InvalidInput("homogeneous model needs n >= 1");
  return GmnlModel(Vector::Constant(n + 1, 1.0 / (n + 1)), alpha);
}

MarkovChainModel GmnlModel::ToChain() const {
  Matrix rho = v_.transpose().replicate(n(), 1);
  return MarkovChainModel(v_, std::move(rho), alpha_);
}

ChoiceProbabilities AttractionChoiceProbabilities(std::span<const double> v, double alpha,
                                                  const Assortment& s) {
  const int n = static_cast<int>(v.size()) - 1;
  CheckAssortment(s, n);
  ChoiceProbabilities out{Vector::Zero(n + 1)};
  if (s.empty()) {
    out.pi[0] = 1.0;
    return out;
  }
  double offered = 0.0;
  for (int k : s) offered += v[k];
  // log of each denominator term; the no-purchase term is log v_0 + alpha (v_0 + sum_S v).
  const double log_outside = std::log(v[0]) + alpha * (v[0] + offered);
  const double log_offered = std::log(offered);
  const double top = std::max(log_outside, log_offered);
  const double log_denominator =
      top + std::log(std::exp(log_outside - top) + std::exp(log_offered - top));
  out.pi[0] = std::exp(log_outside - log_denominator);
  for (int k : s) out.pi[k] = std::exp(std::log(v[k]) - log_denominator);
  return out;
}

ChoiceProbabilities gmnl_choice_probabilities(const GmnlModel& model, const Assortment& s) {
  const Vector& v = model.v();
  return AttractionChoiceProbabilities(std::span<const double>(v.data(), v.size()),
                                       model.alpha(), s);
}

double gmnl_choice_probability(const GmnlModel& model, int i, const Assortment& s) {
  if (i < 0 || i > model.n()) {
    throw InvalidInput("index " + std::to_string(i) + " outside [0, n]");
  }
  CheckAssortment(s, model.n());
  if (i > 0 && !s.contains(i)) return 0.0;
  const Vector& v = model.v();
  double offered = 0.0;
  for (int k : s) offered += v[k];
  const double outside = no_purchase_attraction(model, s);
  return (i == 0 ? outside : v[i]) / (offered + outside);
}

double no_purchase_attraction(const GmnlModel& model, const Assortment& s) {
  CheckAssortment(s, model.n());
  double exposure = model.v()[0];
  for (int k : s) exposure += model.v()[k];
  return model.v()[0] * std::exp(model.alpha() * exposure);
}

double gmnl_revenue(const GmnlModel& model, const Assortment& s, std::span<const double> prices) {
  CheckPrices(prices, model.n());
  CheckAssortment(s, model.n());
  if (s.empty()) return 0.0;
  const Vector& v = model.v();
  double weighted = 0.0;
  double offered = 0.0;
  for (int k : s) {
    weighted += v[k] * prices[k - 1];
    offered += v[k];
  }
  return weighted / (offered + v[0] * std::exp(model.alpha() * (v[0] + offered)));
}

double alt_stopping_choice_probability(const GmnlModel& model, int i, const Assortment& s) {
  CheckAssortment(s, model.n());
  if (i < 1 || i > model.n()) {
    throw InvalidInput("index " + std::to_string(i) + " outside [1, n]");
  }
  if (!s.contains(i)) return 0.0;
  const Vector& v = model.v();
  double offered = 0.0;
  for (int k : s) offered += v[k];
  return v[i] / ((1.0 + v[0]) * offered + v[0] * v[0]);
}

double alt_stopping_revenue(const GmnlModel& model, const Assortment& s,
                            std::span<const double> prices) {
  CheckPrices(prices, model.n());
  double revenue = 0.0;
  for (int k : s) revenue += alt_stopping_choice_probability(model, k, s) * prices[k - 1];
  return revenue;
}

double homogeneous_revenue(int n, double alpha, double price, int k) {
  if (k < 0 || k > n) throw InvalidInput("cardinality outside [0, n]");
  return k * price / (k + std::exp(alpha * (k + 1) / (n + 1)));
}

int homogeneous_optimal_cardinality(int n, double alpha, double price) {
  if (n < 1) throw InvalidInput("homogeneous model needs n >= 1");
  int best = 1;
  double best_revenue = homogeneous_revenue(n, alpha, price, 1);
  for (int k = 2; k <= n; ++k) {
    const double r = homogeneous_revenue(n, alpha, price, k);
    if (r > best_revenue * (1.0 + 1e-12)) {
      best = k;
      best_revenue = r;
    }
  }
  return best;
}

}  // namespace gmchoice
