#pragma once

// Random model generators and independent reference computations shared by
// the unit and acceptance tests. Nothing here calls into the solvers under
// test; the oracles build the absorbing chain from scratch.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gmchoice/chain_core.hpp"
#include "gmchoice/gmnl.hpp"
#include "gmchoice/lowrank.hpp"

namespace gmtest {

using gmchoice::Assortment;
using gmchoice::Matrix;
using gmchoice::Vector;

inline double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector RandomSimplex(std::mt19937_64& rng, int size, double lo = 0.2, double hi = 1.0) {
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = Uniform(rng, lo, hi);
  return v / v.sum();
}

inline gmchoice::GmnlModel RandomGmnl(std::mt19937_64& rng, int n, double alpha) {
  return gmchoice::GmnlModel(RandomSimplex(rng, n + 1), alpha);
}

// Dense chain with every row leaking at least `leak` to the no-purchase state.
inline gmchoice::MarkovChainModel RandomChain(std::mt19937_64& rng, int n, double alpha,
                                              double leak = 0.05) {
  Vector lambda = RandomSimplex(rng, n + 1, 0.0, 1.0);
  Matrix rho(n, n + 1);
  for (int i = 0; i < n; ++i) {
    Vector row = RandomSimplex(rng, n + 1, 0.0, 1.0);
    row *= 1.0 - leak;
    row[0] += leak;
    rho.row(i) = row.transpose();
  }
  return gmchoice::MarkovChainModel(lambda, rho, alpha);
}

// Admissible rank-K model: positive V, each row of U scaled so the
// corresponding transition row sums to one, alpha drawn from [0, log n].
// A heavy no-purchase row keeps u_jk v_jk under 1/n; draws that still break
// it are redrawn.
inline gmchoice::LowRankModel RandomLowRank(std::mt19937_64& rng, int n, int k) {
  for (;;) {
    Matrix v(n + 1, k);
    for (int c = 0; c < k; ++c) v(0, c) = Uniform(rng, 0.3, 1.0) * n;
    for (int j = 1; j <= n; ++j)
      for (int c = 0; c < k; ++c) v(j, c) = Uniform(rng, 0.5, 1.5);
    const Vector colsum = v.colwise().sum().transpose();
    Matrix u(n, k);
    bool admissible = true;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) u(i, c) = Uniform(rng, 0.5, 1.5);
      u.row(i) /= u.row(i).dot(colsum);
      for (int c = 0; c < k; ++c) admissible = admissible && u(i, c) * v(i + 1, c) <= 0.999 / n;
    }
    const double alpha = Uniform(rng, 0.0, std::log(static_cast<double>(n)));
    const Vector lambda = RandomSimplex(rng, n + 1);
    if (admissible) return gmchoice::LowRankModel(u, v, lambda, alpha);
  }
}

inline std::vector<double> RandomPrices(std::mt19937_64& rng, int n, double lo = 1.0,
                                        double hi = 10.0) {
  std::vector<double> p(n);
  for (double& x : p) x = Uniform(rng, lo, hi);
  return p;
}

inline void ForEachAssortment(int n, const std::function<void(const Assortment&)>& fn) {
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
    fn(Assortment::FromMask(mask, n));
}

// Absorption probabilities of the explicit 2n+1 state chain: transient
// states 1..n, absorbing purchase states 1'..n' and the no-purchase state.
// Solves (I - Q) x = b for every absorbing target with a full-pivot LU.
inline Vector AbsorptionOracle(const Vector& lambda, const Matrix& rho, const Vector& mu) {
  const int n = static_cast<int>(rho.rows());
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = (1.0 - mu[i + 1]) * rho(i, j + 1);
  // R columns: purchase of 1..n then no purchase.
  Matrix r = Matrix::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) {
    r(i, i) = mu[i + 1];
    r(i, n) = (1.0 - mu[i + 1]) * rho(i, 0);
  }
  const Matrix b = (Matrix::Identity(n, n) - q).fullPivLu().solve(r);
  Vector pi = Vector::Zero(n + 1);
  pi[0] = lambda[0];
  for (int i = 0; i < n; ++i) {
    pi[0] += lambda[i + 1] * b(i, n);
    for (int j = 0; j < n; ++j) pi[j + 1] += lambda[i + 1] * b(i, j);
  }
  return pi;
}

inline Vector ExponentialMu(const Matrix& rho, double alpha, const Assortment& s) {
  const int n = static_cast<int>(rho.rows());
  Vector mu = Vector::Zero(n + 1);
  for (int i : s) {
    double exposure = rho(i - 1, 0);
    for (int j : s) exposure += rho(i - 1, j);
    mu[i] = std::exp(-alpha * exposure);
  }
  return mu;
}

inline Vector ChainOracle(const gmchoice::MarkovChainModel& m, const Assortment& s) {
  return AbsorptionOracle(m.lambda(), m.rho(), ExponentialMu(m.rho(), m.alpha(), s));
}

inline double RevenueOracle(const Vector& pi, const std::vector<double>& prices) {
  double r = 0.0;
  for (std::size_t j = 0; j < prices.size(); ++j) r += prices[j] * pi[j + 1];
  return r;
}

// pi(i,S) = v_i / (v_0 + sum_S v).
inline Vector MnlOracle(const Vector& v, const Assortment& s) {
  double denom = v[0];
  for (int j : s) denom += v[j];
  Vector pi = Vector::Zero(v.size());
  pi[0] = v[0] / denom;
  for (int j : s) pi[j] = v[j] / denom;
  return pi;
}

// Whether some sub-multiset of c sums to exactly half of the total.
inline bool HasPartition(const std::vector<int>& c) {
  const int total = std::accumulate(c.begin(), c.end(), 0);
  if (total % 2 != 0) return false;
  std::vector<char> reach(total / 2 + 1, 0);
  reach[0] = 1;
  for (int x : c)
    for (int s = total / 2; s >= x; --s)
      if (reach[s - x]) reach[s] = 1;
  return reach[total / 2] != 0;
}

}  // namespace gmtest
