#include "gmchoice/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "gmchoice/errors.hpp"
#include "gmchoice/gmnl.hpp"
#include "gmchoice/random.hpp"

namespace gmchoice {
namespace {

constexpr std::size_t kBlockSize = 1024;

double LogSumExp(double a, double b) {
  const double top = std::max(a, b);
  if (top == -std::numeric_limits<double>::infinity()) return top;
  return top + std::log(std::exp(a - top) + std::exp(b - top));
}

// Runs `per_block(first, last, partial)` over fixed blocks of observations and
// folds the partials in block order.
template <typename Partial, typename PerBlock>
Partial BlockReduce(std::size_t count, int threads, Partial zero, PerBlock per_block) {
  const std::size_t blocks = (count + kBlockSize - 1) / kBlockSize;
  std::vector<Partial> partials(blocks, zero);
  const auto work = [&](std::size_t first_block, std::size_t stride) {
    for (std::size_t b = first_block; b < blocks; b += stride) {
      per_block(b * kBlockSize, std::min(count, (b + 1) * kBlockSize), partials[b]);
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(blocks, 1));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
    for (auto& th : pool) th.join();
  }
  Partial total = zero;
  for (const Partial& p : partials) total += p;
  return total;
}

struct Accumulator {
  double value = 0.0;
  Vector gradient;
  double alpha = 0.0;

  Accumulator& operator+=(const Accumulator& other) {
    value += other.value;
    gradient += other.gradient;
    alpha += other.alpha;
    return *this;
  }
};

void CheckParams(const ChoiceDataset& data, const GmnlParams& params) {
  if (params.beta.size() != data.d()) {
    throw InvalidInput("beta has " + std::to_string(params.beta.size()) +
                       " entries but features have " + std::to_string(data.d()) + " columns");
  }
  if (!(params.alpha >= 0.0) || !std::isfinite(params.alpha)) {
    throw InvalidInput("alpha must be finite and nonnegative");
  }
}

LikelihoodDerivatives Evaluate(const ChoiceDataset& data, const GmnlParams& params,
                               const EvalOptions& options, bool with_gradient) {
  CheckParams(data, params);
  const Matrix& x = data.features();
  const Vector utility = x * params.beta;
  const Vector v = utility.array().exp();
  const double alpha = params.alpha;
  const auto& obs = data.observations();
  const int d = data.d();

  Accumulator zero{0.0, Vector::Zero(d), 0.0};
  const Accumulator total = BlockReduce(obs.size(), options.threads, zero,
      [&](std::size_t first, std::size_t last, Accumulator& acc) {
        Vector exposure_grad(d);
        Vector expected(d);
        for (std::size_t t = first; t < last; ++t) {
          const Observation& o = obs[t];
          double exposure = v[0];
          for (int k : o.offered) exposure += v[k];
          const double z = utility[0] + alpha * exposure;
          double log_den = z;
          for (int k : o.offered) log_den = LogSumExp(log_den, utility[k]);
          const double numerator = o.choice == 0 ? z : utility[o.choice];
          acc.value += numerator - log_den;
          if (!with_gradient) continue;

          // dz/dbeta = x_0 + alpha sum_{j in S+} v_j x_j
          exposure_grad = x.row(0).transpose() * (1.0 + alpha * v[0]);
          for (int k : o.offered) exposure_grad += alpha * v[k] * x.row(k).transpose();
          const double w0 = std::exp(z - log_den);
          expected = w0 * exposure_grad;
          for (int k : o.offered) expected += std::exp(utility[k] - log_den) * x.row(k).transpose();
          if (o.choice == 0) {
            acc.gradient += exposure_grad - expected;
            acc.alpha += exposure * (1.0 - w0);
          } else {
            acc.gradient += x.row(o.choice).transpose() - expected;
            acc.alpha -= exposure * w0;
          }
        }
      });
  return LikelihoodDerivatives{total.value, total.gradient, total.alpha};
}

// Per-observation quantities for the alpha subproblem: exposure A_t = v_0 + c_t,
// log c_t and whether the observation is a no-purchase.
struct AlphaTerms {
  std::vector<double> exposure;
  std::vector<double> log_offered;
  std::vector<char> no_purchase;
  double log_v0 = 0.0;
};

AlphaTerms PrepareAlpha(const ChoiceDataset& data, const Vector& beta) {
  CheckParams(data, GmnlParams{beta, 0.0});
  const Vector v = (data.features() * beta).array().exp();
  AlphaTerms terms;
  terms.log_v0 = std::log(v[0]);
  for (const Observation& o : data.observations()) {
    double offered = 0.0;
    for (int k : o.offered) offered += v[k];
    terms.exposure.push_back(v[0] + offered);
    terms.log_offered.push_back(std::log(offered));
    terms.no_purchase.push_back(o.choice == 0);
  }
  return terms;
}

struct AlphaPartial {
  double value = 0.0, first = 0.0, second = 0.0;
  AlphaPartial& operator+=(const AlphaPartial& o) {
    value += o.value;
    first += o.first;
    second += o.second;
    return *this;
  }
};

AlphaObjective EvaluateAlpha(const AlphaTerms& terms, double alpha, int threads) {
  const AlphaPartial total = BlockReduce(terms.exposure.size(), threads, AlphaPartial{},
      [&](std::size_t first, std::size_t last, AlphaPartial& acc) {
        for (std::size_t t = first; t < last; ++t) {
          const double a = terms.exposure[t];
          const double outside = terms.log_v0 + alpha * a;
          const double log_den = LogSumExp(outside, terms.log_offered[t]);
          const double w0 = std::exp(outside - log_den);
          acc.value += (terms.no_purchase[t] ? alpha * a : 0.0) - log_den;
          acc.first += (terms.no_purchase[t] ? a : 0.0) - w0 * a;
          acc.second -= w0 * (1.0 - w0) * a * a;
        }
      });
  return AlphaObjective{total.value, total.first, total.second};
}

double InfNorm(const Vector& g) { return g.size() ? g.cwiseAbs().maxCoeff() : 0.0; }

// BFGS ascent on l(beta) for fixed alpha with backtracking Armijo steps.
BetaSolveReport Ascend(const ChoiceDataset& data, double alpha, const Vector& start,
                       const BetaSolveOptions& options) {
  const int d = data.d();
  BetaSolveReport report;
  report.beta = start;
  LikelihoodDerivatives cur = Evaluate(data, GmnlParams{start, alpha}, options.eval, true);
  if (!std::isfinite(cur.value)) {
    report.log_likelihood = -std::numeric_limits<double>::infinity();
    report.gradient_norm = std::numeric_limits<double>::infinity();
    return report;
  }
  const LikelihoodDerivatives start_eval = cur;
  const double start_value = cur.value;
  Matrix inv_hessian = Matrix::Identity(d, d);
  bool scaled = false;
  Vector beta = start;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (InfNorm(cur.beta_gradient) <= options.gradient_tolerance) break;
    // Ascent direction for the maximisation (inverse Hessian of -l is PD).
    Vector direction = inv_hessian * cur.beta_gradient;
    double slope = cur.beta_gradient.dot(direction);
    if (!(slope > 0.0)) {
      inv_hessian.setIdentity();
      scaled = false;
      direction = cur.beta_gradient;
      slope = direction.squaredNorm();
    }
    double step = scaled ? 1.0 : std::min(1.0, 1.0 / InfNorm(cur.beta_gradient));
    LikelihoodDerivatives trial;
    Vector candidate;
    bool accepted = false;
    // Below this change the likelihood cannot resolve progress any more; such
    // steps are judged by the gradient instead.
    const double flat = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.value));
    for (int shrink = 0; shrink < 60; ++shrink, step *= 0.5) {
      candidate = beta + step * direction;
      if (candidate == beta) break;
      trial = Evaluate(data, GmnlParams{candidate, alpha}, options.eval, true);
      if (!std::isfinite(trial.value) || !trial.beta_gradient.allFinite()) continue;
      const double gain = trial.value - cur.value;
      if ((gain > 0.0 && gain >= 1e-4 * step * slope) ||
          (std::abs(gain) <= flat && InfNorm(trial.beta_gradient) < InfNorm(cur.beta_gradient))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stalled; keep the current iterate

    const Vector s = candidate - beta;
    const Vector y = cur.beta_gradient - trial.beta_gradient;  // gradient of -l
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hessian = Matrix::Identity(d, d) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix id = Matrix::Identity(d, d);
      inv_hessian = (id - rho * s * y.transpose()) * inv_hessian * (id - rho * y * s.transpose()) +
                    rho * s * s.transpose();
    }
    beta = candidate;
    cur = trial;
  }
  if (cur.value < start_value) {
    // Steps accepted on the gradient alone may lose a few ulps of likelihood.
    beta = start;
    cur = start_eval;
  }
  report.beta = beta;
  report.log_likelihood = cur.value;
  report.iterations = it;
  report.gradient_norm = InfNorm(cur.beta_gradient);
  report.converged = report.gradient_norm <= options.gradient_tolerance;
  return report;
}

// Newton step on the profile likelihood l_p(alpha) = max_beta l(beta, alpha)
// taken from a point where the beta gradient is (nearly) zero. beta moves
// along the ridge d beta / d alpha = -H^{-1} l_{beta alpha}; the step is
// halved until the likelihood improves. Mixed and beta second derivatives
// come from central differences of the analytic gradient.
GmnlParams RidgeStep(const ChoiceDataset& data, const GmnlParams& at, double value,
                     double alpha_max, const EvalOptions& eval) {
  const int d = data.d();
  const auto grad = [&](const Vector& beta, double alpha) {
    return Evaluate(data, GmnlParams{beta, alpha}, eval, true);
  };
  Matrix hessian(d, d);
  for (int i = 0; i < d; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(at.beta[i]));
    Vector up = at.beta, down = at.beta;
    up[i] += h;
    down[i] -= h;
    hessian.col(i) = (grad(up, at.alpha).beta_gradient - grad(down, at.alpha).beta_gradient) / (2 * h);
  }
  hessian = 0.5 * (hessian + hessian.transpose()).eval();
  const double ha = 1e-5 * (1.0 + at.alpha);
  const double lo = std::max(0.0, at.alpha - ha);
  const double hi = at.alpha + ha;
  const Vector mixed = (grad(at.beta, hi).beta_gradient - grad(at.beta, lo).beta_gradient) / (hi - lo);

  const LikelihoodDerivatives here = grad(at.beta, at.alpha);
  const AlphaObjective a = EvaluateAlpha(PrepareAlpha(data, at.beta), at.alpha, eval.threads);
  Eigen::LDLT<Matrix> ldlt(-hessian);  // -H is positive definite near a beta maximiser
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return at;
  const Vector response = ldlt.solve(mixed);            // d beta / d alpha
  const Vector correction = ldlt.solve(here.beta_gradient);  // residual Newton step in beta
  const double curvature = a.second + mixed.dot(response);
  if (!(curvature < 0.0) || !std::isfinite(curvature)) return at;
  const double slope = a.first + response.dot(here.beta_gradient);
  double step = -slope / curvature;
  for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
    const double alpha = std::clamp(at.alpha + step, 0.0, alpha_max);
    const GmnlParams trial{at.beta + correction + (alpha - at.alpha) * response, alpha};
    const double v = Evaluate(data, trial, eval, false).value;
    if (std::isfinite(v) && v > value) return trial;
  }
  return at;
}


}  // namespace

ChoiceDataset::ChoiceDataset(int n, Matrix features, std::vector<Observation> observations)
    : n_(n), features_(std::move(features)), observations_(std::move(observations)) {
  if (n_ < 1) throw InvalidInput("dataset needs at least one product");
  if (features_.rows() != n_ + 1) {
    throw InvalidInput("feature matrix must have n+1 rows (no-purchase row first); got " +
                       std::to_string(features_.rows()));
  }
  for (std::size_t t = 0; t < observations_.size(); ++t) {
    const Observation& o = observations_[t];
    if (o.offered.empty()) {
      throw InvalidInput("observation " + std::to_string(t) + " has an empty assortment");
    }
    if (o.offered.max_member() > n_) {
      throw InvalidInput("observation " + std::to_string(t) + " offers an unknown product");
    }
    if (o.choice < 0 || (o.choice > 0 && !o.offered.contains(o.choice))) {
      throw InvalidInput("observation " + std::to_string(t) + " chose " +
                         std::to_string(o.choice) + ", which was not offered");
    }
  }
}

double log_likelihood(const ChoiceDataset& data, const GmnlParams& params,
                      const EvalOptions& options) {
  return Evaluate(data, params, options, false).value;
}

LikelihoodDerivatives log_likelihood_with_gradient(const ChoiceDataset& data,
                                                   const GmnlParams& params,
                                                   const EvalOptions& options) {
  return Evaluate(data, params, options, true);
}

AlphaObjective alpha_objective(const ChoiceDataset& data, const Vector& beta, double alpha,
                               const EvalOptions& options) {
  return EvaluateAlpha(PrepareAlpha(data, beta), alpha, options.threads);
}

double solve_partial_alpha(const ChoiceDataset& data, const Vector& beta, double alpha_max,
                           const EvalOptions& options) {
  if (!(alpha_max > 0.0)) throw InvalidInput("alpha_max must be positive");
  const AlphaTerms terms = PrepareAlpha(data, beta);
  const auto at = [&](double a) { return EvaluateAlpha(terms, a, options.threads); };

  // Strict concavity: a nonpositive slope at 0 puts the maximiser on the
  // boundary, likewise a nonnegative slope at alpha_max.
  if (at(0.0).first <= 0.0) return 0.0;
  if (at(alpha_max).first >= 0.0) return alpha_max;

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = alpha_max;
  double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
  double fa = at(a).value, fb = at(b).value;
  while (hi - lo > 1e-8) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = at(b).value;
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = at(a).value;
    }
  }
  double alpha = 0.5 * (lo + hi);
  AlphaObjective f = at(alpha);
  // Newton on the slope. Near the optimum the objective changes by less than
  // its rounding error, so progress is judged by |slope| alone.
  for (int polish = 0; polish < 20 && std::abs(f.first) > 1e-10 && f.second < 0.0; ++polish) {
    const double next = std::clamp(alpha - f.first / f.second, 0.0, alpha_max);
    const AlphaObjective g = at(next);
    if (!(std::abs(g.first) < std::abs(f.first))) break;
    alpha = next;
    f = g;
  }
  return alpha;
}

BetaSolveReport solve_partial_beta(const ChoiceDataset& data, double alpha,
                                   const Vector& beta_init, const BetaSolveOptions& options) {
  if (data.size() == 0) throw InvalidInput("dataset is empty");
  CheckParams(data, GmnlParams{beta_init, alpha});
  BetaSolveReport best = Ascend(data, alpha, beta_init, options);
  // At alpha = 0 the problem is concave and one start suffices.
  const int restarts = alpha > 0.0 ? options.restarts : 0;
  RandomStream rng(options.seed);
  for (int r = 0; r < restarts; ++r) {
    Vector start = best.beta;
    for (Eigen::Index i = 0; i < start.size(); ++i) {
      start[i] += 0.1 * (1.0 + std::abs(start[i])) * rng.Normal();
    }
    BetaSolveReport trial = Ascend(data, alpha, start, options);
    if (trial.log_likelihood > best.log_likelihood) best = std::move(trial);
  }
  return best;
}

Vector estimate_mnl(const ChoiceDataset& data, const BetaSolveOptions& options) {
  return solve_partial_beta(data, 0.0, Vector::Zero(data.d()), options).beta;
}

EstimationResult estimate_gmnl(const ChoiceDataset& data, const EstimationOptions& options) {
  if (data.size() == 0) throw InvalidInput("dataset is empty");
  if (options.max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
  const EvalOptions& eval = options.beta.eval;

  EstimationResult result;
  result.params.beta = estimate_mnl(data, options.beta);
  result.params.alpha = 0.0;
  result.log_likelihood = log_likelihood(data, result.params, eval);
  result.trajectory.push_back({0, 0.0, result.log_likelihood});

  for (int k = 1; k <= options.max_iterations; ++k) {
    const double previous = result.log_likelihood;
    GmnlParams next = result.params;
    next.alpha = solve_partial_alpha(data, next.beta, options.alpha_max, eval);
    if (log_likelihood(data, next, eval) < previous) next.alpha = result.params.alpha;
    const BetaSolveReport beta = solve_partial_beta(data, next.alpha, next.beta, options.beta);
    const double value = log_likelihood(data, {beta.beta, next.alpha}, eval);
    if (value >= log_likelihood(data, next, eval)) next.beta = beta.beta;

    double value_next = log_likelihood(data, next, eval);
    if (options.extrapolate) {
      const GmnlParams moved = RidgeStep(data, next, value_next, options.alpha_max, eval);
      const double v = log_likelihood(data, moved, eval);
      if (v > value_next) {
        next = moved;
        value_next = v;
      }
    }

    result.params = next;
    result.log_likelihood = value_next;
    result.iterations = k;
    result.trajectory.push_back({k, next.alpha, result.log_likelihood});
    if (std::abs(result.log_likelihood - previous) <=
        options.tolerance * std::max(1.0, std::abs(previous))) {
      result.converged = true;
      break;
    }
  }
  return result;
}

Vector Attractions(const Vector& beta, const Matrix& features) {
  if (beta.size() != features.cols()) throw InvalidInput("beta and features disagree in d");
  return (features * beta).array().exp();
}

ChoiceProbabilities predict_choice_probs(const GmnlParams& params, const Matrix& features,
                                         const Assortment& s) {
  const Vector v = Attractions(params.beta, features);
  return AttractionChoiceProbabilities(std::span<const double>(v.data(), v.size()), params.alpha,
                                       s);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += mid_rank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(scores.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw InvalidInput("ROC AUC needs at least one positive and one negative label");
  }
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double holdout_auc(const GmnlParams& params, const ChoiceDataset& holdout) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const Observation& o : holdout.observations()) {
    const ChoiceProbabilities p = predict_choice_probs(params, holdout.features(), o.offered);
    scores.push_back(p.no_purchase());
    labels.push_back(o.choice == 0);
    for (int i : o.offered) {
      scores.push_back(p[i]);
      labels.push_back(o.choice == i);
    }
  }
  return roc_auc(scores, labels);
}

}  // namespace gmchoice
