#pragma once

#include <span>

#include "gmchoice/chain_core.hpp"

namespace gmchoice {

// Rank-K model with rho(N, N+) = U V^T. U is n x K, V is (n+1) x K with row 0
// belonging to the no-purchase state. Construction enforces
//   * sum_{j=0..n} sum_k u_ik v_jk = 1 for every product i,
//   * u_jk v_jk <= 1/n,
//   * alpha <= log n,
//   * v_jk > 0 for j >= 1,
// which together bound the spectral radius of UV(S) by 1 - 1/n^2.
class LowRankModel {
 public:
  LowRankModel(Matrix u, Matrix v, Vector lambda, double alpha);

  int n() const { return static_cast<int>(u_.rows()); }
  int rank() const { return static_cast<int>(u_.cols()); }
  const Matrix& u() const { return u_; }
  const Matrix& v() const { return v_; }
  const Vector& lambda() const { return lambda_; }
  double alpha() const { return alpha_; }

  // Expanded n x (n+1) transition matrix U V^T.
  Matrix Rho() const { return u_ * v_.transpose(); }
  MarkovChainModel ToChain() const;

 private:
  Matrix u_;
  Matrix v_;
  Vector lambda_;
  double alpha_;
};

// V_k(S) = sum_{j in S+} v_jk.
Vector ExposureByFactor(const LowRankModel& model, const Assortment& s);

double lowrank_mu(const LowRankModel& model, int i, const Assortment& s);

// UV(S)_{km} = sum_{j=1..n} (1 - mu(j,S)) u_jk v_jm.
Matrix uv_matrix(const LowRankModel& model, const Assortment& s);

// Largest eigenvalue modulus of a small dense matrix.
double SpectralRadius(const Matrix& m);

// Revenue through the K x K decomposition
//   sum_i lambda_i (1 - mu_i) f(i,S) + sum_{i in S} lambda_i mu_i p_i,
//   f(i,S) = sum_{j in S} p_j mu_j u_i^T [I - UV(S)^T]^{-1} v_j.
double lowrank_revenue(const LowRankModel& model, const Assortment& s,
                       std::span<const double> prices);

enum class PerturbationOutcome {
  kHolds,
  kConclusionFails,
  kPreconditionFails,
};

// Checks the sandwich
//   (1 - c eps) [I - H]^{-1} vhat <= [I - UV(S)]^{-1} v_j <= (1 + c eps) [I - H]^{-1} vhat
// entrywise, given (1 - eps) H <= UV(S) <= (1 + eps) H and
// (1 - eps) vhat <= v_j <= (1 + eps) vhat entrywise.
PerturbationOutcome perturbation_bound_check(const LowRankModel& model, const Assortment& s,
                                             int j, const Matrix& h, const Vector& vhat,
                                             double eps, double constant = 4.0);

}  // namespace gmchoice
