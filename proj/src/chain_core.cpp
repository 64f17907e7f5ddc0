#include "gmchoice/chain_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmchoice/errors.hpp"

namespace gmchoice {
namespace {

constexpr double kStochasticTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-9;

void CheckProbabilityVector(const Vector& p, const std::string& what) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      throw InvalidInput(what + " has a negative or non-finite entry at index " +
                         std::to_string(i));
    }
  }
  if (std::abs(p.sum() - 1.0) > kStochasticTolerance) {
    throw InvalidInput(what + " does not sum to 1");
  }
}

Vector SoftmaxOverMask(const Vector& scores, const std::vector<char>& include) {
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    if (include[j]) top = std::max(top, scores[j]);
  }
  Vector out = Vector::Zero(scores.size());
  double total = 0.0;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    if (!include[j]) continue;
    out[j] = std::exp(scores[j] - top);
    total += out[j];
  }
  return out / total;
}

}  // namespace

Assortment::Assortment(std::initializer_list<int> members)
    : Assortment(std::vector<int>(members)) {}

Assortment::Assortment(std::vector<int> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  for (size_t k = 0; k < members_.size(); ++k) {
    if (members_[k] < 1) {
      throw InvalidInput("assortment member " + std::to_string(members_[k]) +
                         " is not a product index (must be >= 1)");
    }
    if (k > 0 && members_[k] == members_[k - 1]) {
      throw InvalidInput("assortment lists product " + std::to_string(members_[k]) + " twice");
    }
  }
}

Assortment Assortment::FromMask(std::uint64_t mask, int n) {
  Assortment s;
  for (int i = 1; i <= n; ++i) {
    if (mask & (std::uint64_t{1} << (i - 1))) s.members_.push_back(i);
  }
  return s;
}

bool Assortment::contains(int i) const {
  return std::binary_search(members_.begin(), members_.end(), i);
}

std::vector<char> Assortment::Indicator(int n) const {
  std::vector<char> x(static_cast<size_t>(n) + 1, 0);
  x[0] = 1;
  for (int i : members_) x[i] = 1;
  return x;
}

const Assortment& AssortmentBuffer::Load(std::uint64_t mask, int n) {
  current_.members_.clear();
  for (int i = 1; i <= n; ++i) {
    if (mask & (std::uint64_t{1} << (i - 1))) current_.members_.push_back(i);
  }
  return current_;
}

StoppingFunction StoppingFunction::Exponential() {
  return StoppingFunction([](double alpha, double x) { return std::exp(-alpha * x); }, true);
}

StoppingFunction StoppingFunction::Reciprocal() {
  return StoppingFunction([](double, double x) { return 1.0 / x; }, false);
}

MarkovChainModel::MarkovChainModel(Vector lambda, Matrix rho, double alpha,
                                   StoppingFunction stopping)
    : lambda_(std::move(lambda)), rho_(std::move(rho)), alpha_(alpha),
      stopping_(std::move(stopping)) {
  const auto n = rho_.rows();
  if (n < 1) throw InvalidInput("model needs at least one product");
  if (rho_.cols() != n + 1) {
    throw InvalidInput("rho must be n x (n+1); got " + std::to_string(n) + " x " +
                       std::to_string(rho_.cols()));
  }
  if (lambda_.size() != n + 1) {
    throw InvalidInput("lambda must have n+1 entries (states 0..n)");
  }
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw InvalidInput("alpha must be finite and nonnegative");
  }
  CheckProbabilityVector(lambda_, "lambda");
  for (Eigen::Index i = 0; i < n; ++i) {
    CheckProbabilityVector(rho_.row(i).transpose(), "rho row " + std::to_string(i + 1));
  }
}

void CheckAssortment(const Assortment& s, int n) {
  if (s.max_member() > n) {
    throw InvalidInput("assortment member " + std::to_string(s.max_member()) +
                       " exceeds product count " + std::to_string(n));
  }
}

void CheckPrices(std::span<const double> prices, int n) {
  if (static_cast<int>(prices.size()) != n) {
    throw InvalidInput("expected " + std::to_string(n) + " prices, got " +
                       std::to_string(prices.size()));
  }
  for (double p : prices) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("prices must be positive and finite");
  }
}

namespace {

void CheckProduct(int i, int n) {
  if (i < 1 || i > n) {
    throw InvalidInput("product index " + std::to_string(i) + " outside [1, " +
                       std::to_string(n) + "]");
  }
}

double StoppingAt(const MarkovChainModel& model, int i, const std::vector<char>& offered) {
  if (!offered[i]) return 0.0;
  const auto row = model.rho().row(i - 1);
  double exposure = 0.0;
  for (int j = 0; j <= model.n(); ++j) {
    if (offered[j]) exposure += row[j];
  }
  const double mu = model.stopping()(model.alpha(), exposure);
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw InvalidInput("stopping function produced " + std::to_string(mu) +
                       ", which is not a probability");
  }
  return mu;
}

}  // namespace

double stopping_probability(const MarkovChainModel& model, int i, const Assortment& s) {
  CheckProduct(i, model.n());
  CheckAssortment(s, model.n());
  return StoppingAt(model, i, s.Indicator(model.n()));
}

double modified_transition(const MarkovChainModel& model, int i, int j, const Assortment& s) {
  CheckProduct(i, model.n());
  if (j < 0 || j > model.n()) {
    throw InvalidInput("state index " + std::to_string(j) + " outside [0, n]");
  }
  return (1.0 - stopping_probability(model, i, s)) * model.rho()(i - 1, j);
}

Vector StoppingVector(const MarkovChainModel& model, const Assortment& s) {
  CheckAssortment(s, model.n());
  const auto offered = s.Indicator(model.n());
  Vector mu = Vector::Zero(model.n() + 1);
  for (int i : s) mu[i] = StoppingAt(model, i, offered);
  return mu;
}

SpectralBounds PerronBounds(const Matrix& q, int max_iterations, double tolerance) {
  // Power iteration on I + Q keeps every iterate strictly positive, so the
  // Collatz-Wielandt ratios stay defined even when Q has zero rows.
  const auto n = q.rows();
  Vector x = Vector::Ones(n);
  SpectralBounds bounds;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector qx = q * x;
    bounds.lower = std::numeric_limits<double>::infinity();
    bounds.upper = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = qx[i] / x[i];
      bounds.lower = std::min(bounds.lower, r);
      bounds.upper = std::max(bounds.upper, r);
    }
    bounds.iterations = it;
    if (bounds.upper - bounds.lower <= tolerance || bounds.upper < 1.0 - tolerance) break;
    x = (x + qx) / (x + qx).maxCoeff();
  }
  return bounds;
}

ChoiceProbabilities choice_probabilities(const MarkovChainModel& model, const Assortment& s) {
  const int n = model.n();
  const Vector mu = StoppingVector(model, s);

  Matrix q(n, n);
  for (int i = 0; i < n; ++i) {
    q.row(i) = (1.0 - mu[i + 1]) * model.rho().row(i).tail(n);
  }
  const Matrix system = Matrix::Identity(n, n) - q;
  Eigen::PartialPivLU<Matrix> lu(system.transpose());

  const SpectralBounds bounds = PerronBounds(q);
  if (!(bounds.upper < 1.0 - 1e-10)) {
    // Power iteration could not certify rho < 1; fall back to the M-matrix
    // characterisation: rho(Q) < 1 iff (I - Q)^{-1} exists and is nonnegative.
    const Matrix inverse = lu.inverse().transpose();
    const bool finite = inverse.allFinite();
    if (!finite || inverse.minCoeff() < -1e-9 || bounds.lower >= 1.0) {
      throw SpectralRadiusViolation(
          "spectral radius of Diag(1 - mu) rho(N, N) is not below 1 (power-iteration bounds [" +
          std::to_string(bounds.lower) + ", " + std::to_string(bounds.upper) + "])");
    }
  }

  // Row vector y^T = lambda_N^T (I - Q)^{-1}; pi = y^T Pi(S).
  const Vector rhs = model.lambda().tail(n);
  const Vector y = lu.solve(rhs);
  const double residual = (system.transpose() * y - rhs).cwiseAbs().maxCoeff();
  if (!y.allFinite() || !(residual <= kResidualTolerance)) {
    throw SingularSystem("absorption system residual " + std::to_string(residual) +
                         " exceeds tolerance");
  }

  ChoiceProbabilities out{Vector::Zero(n + 1)};
  out.pi[0] = model.lambda()[0];
  for (int i = 1; i <= n; ++i) {
    out.pi[i] = y[i - 1] * mu[i];
    out.pi[0] += y[i - 1] * (1.0 - mu[i]) * model.rho()(i - 1, 0);
  }
  return out;
}

double expected_revenue(const MarkovChainModel& model, const Assortment& s,
                        std::span<const double> prices) {
  CheckPrices(prices, model.n());
  if (s.empty()) return 0.0;
  const ChoiceProbabilities probs = choice_probabilities(model, s);
  double revenue = 0.0;
  for (int i : s) revenue += probs[i] * prices[i - 1];
  return revenue;
}

namespace {

void CheckFeatures(const Matrix& features, Eigen::Index d) {
  if (features.rows() < 2) {
    throw InvalidInput("features need a no-purchase row plus at least one product row");
  }
  if (features.cols() != d) {
    throw InvalidInput("coefficient dimension " + std::to_string(d) +
                       " does not match feature dimension " + std::to_string(features.cols()));
  }
}

template <typename PairScore>
MarkovChainModel BuildFeatureChain(const Vector& beta0, const Matrix& features, double alpha,
                                   PairScore pair_score) {
  const int n = static_cast<int>(features.rows()) - 1;
  const Vector utilities = features * beta0;
  const Vector lambda = SoftmaxOverMask(utilities, std::vector<char>(n + 1, 1));

  Matrix rho(n, n + 1);
  Vector scores(n + 1);
  for (int i = 1; i <= n; ++i) {
    std::vector<char> include(n + 1, 1);
    include[i] = 0;
    for (int j = 0; j <= n; ++j) {
      scores[j] = j == i ? 0.0 : pair_score(features.row(j) - features.row(i));
    }
    rho.row(i - 1) = SoftmaxOverMask(scores, include).transpose();
  }
  return MarkovChainModel(lambda, std::move(rho), alpha);
}

}  // namespace

MarkovChainModel build_feature_chain_mnl(const Vector& beta, const Matrix& features,
                                         double alpha) {
  CheckFeatures(features, beta.size());
  return BuildFeatureChain(beta, features, alpha,
                           [&](const Eigen::RowVectorXd& diff) { return diff.dot(beta); });
}

MarkovChainModel build_feature_chain_general(const Vector& beta0, const Vector& beta1,
                                             const Vector& beta2, const Matrix& features,
                                             double alpha) {
  CheckFeatures(features, beta0.size());
  CheckFeatures(features, beta1.size());
  CheckFeatures(features, beta2.size());
  return BuildFeatureChain(beta0, features, alpha, [&](const Eigen::RowVectorXd& diff) {
    const Eigen::RowVectorXd pos = diff.cwiseMax(0.0);
    const Eigen::RowVectorXd neg = diff.cwiseMin(0.0);
    return pos.dot(beta1) + neg.dot(beta2);
  });
}

MarkovChainModel HomogeneousChain(int n, double alpha) {
  if (n < 1) throw InvalidInput("homogeneous chain needs n >= 1");
  const double w = 1.0 / (n + 1);
  return MarkovChainModel(Vector::Constant(n + 1, w), Matrix::Constant(n, n + 1, w), alpha);
}

}  // namespace gmchoice
