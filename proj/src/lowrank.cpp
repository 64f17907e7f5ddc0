#include "gmchoice/lowrank.hpp"

#include <cmath>
#include <string>

#include "gmchoice/errors.hpp"

namespace gmchoice {
namespace {

constexpr double kTolerance = 1e-12;

Vector StoppingByProduct(const LowRankModel& model, const Assortment& s) {
  const Vector exposure = ExposureByFactor(model, s);
  Vector mu = Vector::Zero(model.n() + 1);
  for (int i : s) mu[i] = std::exp(-model.alpha() * model.u().row(i - 1).dot(exposure));
  return mu;
}

Matrix UvFromStopping(const LowRankModel& model, const Vector& mu) {
  const int k = model.rank();
  Matrix m = Matrix::Zero(k, k);
  for (int j = 1; j <= model.n(); ++j) {
    m += (1.0 - mu[j]) * model.u().row(j - 1).transpose() * model.v().row(j);
  }
  return m;
}

}  // namespace

LowRankModel::LowRankModel(Matrix u, Matrix v, Vector lambda, double alpha)
    : u_(std::move(u)), v_(std::move(v)), lambda_(std::move(lambda)), alpha_(alpha) {
  const auto n = u_.rows();
  const auto k = u_.cols();
  if (n < 2 || k < 1) throw InvalidInput("low-rank model needs n >= 2 and K >= 1");
  if (k >= n) throw InvalidInput("rank K must be smaller than n");
  if (v_.rows() != n + 1 || v_.cols() != k) throw InvalidInput("V must be (n+1) x K");
  if (lambda_.size() != n + 1) throw InvalidInput("lambda must have n+1 entries");
  if (u_.minCoeff() < 0.0 || v_.minCoeff() < 0.0) {
    throw InvalidInput("U and V must be nonnegative");
  }
  if (!u_.allFinite() || !v_.allFinite() || !lambda_.allFinite()) {
    throw InvalidInput("U, V and lambda must be finite");
  }
  if (lambda_.minCoeff() < 0.0 || std::abs(lambda_.sum() - 1.0) > kTolerance) {
    throw InvalidInput("lambda must be a probability vector");
  }
  if (v_.bottomRows(n).minCoeff() <= 0.0) {
    throw InvalidInput("product factors v_jk must be strictly positive");
  }
  const Vector column_totals = v_.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(u_.row(i).dot(column_totals) - 1.0) > kTolerance) {
      throw InvalidInput("row " + std::to_string(i + 1) + " of U V^T does not sum to 1");
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (u_(i, c) * v_(i + 1, c) > 1.0 / static_cast<double>(n) + kTolerance) {
        throw InvalidInput("u_jk v_jk exceeds 1/n for product " + std::to_string(i + 1));
      }
    }
  }
  if (!(alpha_ >= 0.0) || alpha_ > std::log(static_cast<double>(n)) + kTolerance) {
    throw InvalidInput("alpha must lie in [0, log n]");
  }
}

MarkovChainModel LowRankModel::ToChain() const { return MarkovChainModel(lambda_, Rho(), alpha_); }

Vector ExposureByFactor(const LowRankModel& model, const Assortment& s) {
  CheckAssortment(s, model.n());
  Vector exposure = model.v().row(0).transpose();
  for (int j : s) exposure += model.v().row(j).transpose();
  return exposure;
}

double lowrank_mu(const LowRankModel& model, int i, const Assortment& s) {
  if (i < 1 || i > model.n()) {
    throw InvalidInput("product index " + std::to_string(i) + " outside [1, n]");
  }
  if (!s.contains(i)) return 0.0;
  return std::exp(-model.alpha() * model.u().row(i - 1).dot(ExposureByFactor(model, s)));
}

Matrix uv_matrix(const LowRankModel& model, const Assortment& s) {
  return UvFromStopping(model, StoppingByProduct(model, s));
}

double SpectralRadius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double lowrank_revenue(const LowRankModel& model, const Assortment& s,
                       std::span<const double> prices) {
  CheckPrices(prices, model.n());
  CheckAssortment(s, model.n());
  if (s.empty()) return 0.0;
  const Vector mu = StoppingByProduct(model, s);
  const int k = model.rank();
  // Woodbury on (I - Diag(1 - mu) U V^T)^{-1} puts the K x K block in the
  // order sum_j (1 - mu_j) v_j u_j^T, the transpose of UV(S). Solving with
  // UV(S) itself disagrees with the expanded chain as soon as K > 1.
  const Matrix system = Matrix::Identity(k, k) - UvFromStopping(model, mu).transpose();

  // w = sum_{j in S} p_j mu_j v_j, so f(i,S) = u_i^T [I - UV(S)^T]^{-1} w.
  Vector w = Vector::Zero(k);
  for (int j : s) w += prices[j - 1] * mu[j] * model.v().row(j).transpose();
  Eigen::PartialPivLU<Matrix> lu(system);
  const Vector solved = lu.solve(w);
  if (!solved.allFinite() || (system * solved - w).cwiseAbs().maxCoeff() > 1e-9) {
    throw SingularSystem("I - UV(S) is singular");
  }

  double revenue = 0.0;
  for (int i = 1; i <= model.n(); ++i) {
    revenue += model.lambda()[i] * (1.0 - mu[i]) * model.u().row(i - 1).dot(solved);
  }
  for (int i : s) revenue += model.lambda()[i] * mu[i] * prices[i - 1];
  return revenue;
}

PerturbationOutcome perturbation_bound_check(const LowRankModel& model, const Assortment& s,
                                             int j, const Matrix& h, const Vector& vhat,
                                             double eps, double constant) {
  const int k = model.rank();
  if (j < 0 || j > model.n()) throw InvalidInput("factor row index outside [0, n]");
  if (h.rows() != k || h.cols() != k || vhat.size() != k) {
    throw InvalidInput("H must be K x K and vhat must have K entries");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("eps must lie in (0, 1)");

  const Matrix uv = uv_matrix(model, s);
  const Vector vj = model.v().row(j).transpose();
  const double slack = 1e-12;
  const bool matrix_ok = ((1.0 - eps) * h.array() <= uv.array() + slack).all() &&
                         (uv.array() <= (1.0 + eps) * h.array() + slack).all();
  const bool vector_ok = ((1.0 - eps) * vhat.array() <= vj.array() + slack).all() &&
                         (vj.array() <= (1.0 + eps) * vhat.array() + slack).all();
  if (!matrix_ok || !vector_ok) return PerturbationOutcome::kPreconditionFails;

  const Matrix id = Matrix::Identity(k, k);
  const Vector exact = (id - uv).partialPivLu().solve(vj);
  const Vector approx = (id - h).partialPivLu().solve(vhat);
  const bool lower = ((1.0 - constant * eps) * approx.array() <= exact.array() + slack).all();
  const bool upper = (exact.array() <= (1.0 + constant * eps) * approx.array() + slack).all();
  return lower && upper ? PerturbationOutcome::kHolds : PerturbationOutcome::kConclusionFails;
}

}  // namespace gmchoice
