#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gmchoice {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A set of offered products, stored as sorted unique 1-based indices. The
// no-purchase state 0 is never a member; it is always implicitly available.
class Assortment {
 public:
  Assortment() = default;
  Assortment(std::initializer_list<int> members);
  explicit Assortment(std::vector<int> members);

  // Bit i-1 of `mask` selects product i.
  static Assortment FromMask(std::uint64_t mask, int n);

  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  bool contains(int i) const;
  int max_member() const { return members_.empty() ? 0 : members_.back(); }

  // Indicator over 0..n; entry 0 is always true (S plus the no-purchase state).
  std::vector<char> Indicator(int n) const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const Assortment&, const Assortment&) = default;
  // Lexicographic order on the sorted member lists.
  friend auto operator<=>(const Assortment& a, const Assortment& b) {
    return a.members_ <=> b.members_;
  }

 private:
  friend class AssortmentBuffer;
  std::vector<int> members_;
};

// Reusable storage for enumerating assortments without reallocating.
class AssortmentBuffer {
 public:
  const Assortment& Load(std::uint64_t mask, int n);

 private:
  Assortment current_;
};

// mu(i, S) as a function of the scale alpha and the exposure
// x = sum_{j in S+} rho_ij. The exponential form exp(-alpha x) is the model's
// default; the reciprocal form 1/x only yields a closed-form comparison
// model (it exceeds 1 whenever x < 1) and is rejected by the chain solver.
class StoppingFunction {
 public:
  using Fn = std::function<double(double alpha, double exposure)>;

  static StoppingFunction Exponential();
  static StoppingFunction Reciprocal();

  double operator()(double alpha, double exposure) const { return fn_(alpha, exposure); }
  bool is_exponential() const { return exponential_; }

 private:
  StoppingFunction(Fn fn, bool exponential) : fn_(std::move(fn)), exponential_(exponential) {}
  Fn fn_;
  bool exponential_ = true;
};

// General model: arrival distribution over states 0..n, an n x (n+1)
// row-stochastic transition matrix (column 0 is the no-purchase state) and a
// comparison scale alpha. Immutable after construction.
class MarkovChainModel {
 public:
  MarkovChainModel(Vector lambda, Matrix rho, double alpha,
                   StoppingFunction stopping = StoppingFunction::Exponential());

  int n() const { return static_cast<int>(rho_.rows()); }
  const Vector& lambda() const { return lambda_; }
  const Matrix& rho() const { return rho_; }
  double alpha() const { return alpha_; }
  const StoppingFunction& stopping() const { return stopping_; }

 private:
  Vector lambda_;
  Matrix rho_;
  double alpha_;
  StoppingFunction stopping_;
};

struct ChoiceProbabilities {
  Vector pi;  // pi[0] is the no-purchase probability

  double no_purchase() const { return pi[0]; }
  double operator[](int i) const { return pi[i]; }
  double sum() const { return pi.sum(); }
};

// Throws InvalidInput unless every member of `s` is in [1, n].
void CheckAssortment(const Assortment& s, int n);
// Throws InvalidInput unless prices has length n with all entries > 0.
void CheckPrices(std::span<const double> prices, int n);

double stopping_probability(const MarkovChainModel& model, int i, const Assortment& s);

// (1 - mu(i, S)) * rho_ij for 1 <= i <= n, 0 <= j <= n.
double modified_transition(const MarkovChainModel& model, int i, int j, const Assortment& s);

// Stopping probabilities mu(1..n, S) in a length n+1 vector (entry 0 unused).
Vector StoppingVector(const MarkovChainModel& model, const Assortment& s);

// Upper and lower Collatz-Wielandt bounds on the spectral radius of a
// nonnegative square matrix, refined by power iteration.
struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
};
SpectralBounds PerronBounds(const Matrix& q, int max_iterations = 200, double tolerance = 1e-10);

ChoiceProbabilities choice_probabilities(const MarkovChainModel& model, const Assortment& s);

double expected_revenue(const MarkovChainModel& model, const Assortment& s,
                        std::span<const double> prices);

// features is (n+1) x d with row 0 describing the no-purchase state.
MarkovChainModel build_feature_chain_mnl(const Vector& beta, const Matrix& features,
                                         double alpha = 0.0);
MarkovChainModel build_feature_chain_general(const Vector& beta0, const Vector& beta1,
                                             const Vector& beta2, const Matrix& features,
                                             double alpha = 0.0);

// Homogeneous complete graph: lambda_i = rho_ij = 1/(n+1).
MarkovChainModel HomogeneousChain(int n, double alpha);

}  // namespace gmchoice
