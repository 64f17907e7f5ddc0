#include "gmchoice/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "gmchoice/errors.hpp"

namespace gmchoice {
namespace {

std::vector<double> Cumulative(const Eigen::Ref<const Eigen::RowVectorXd>& weights) {
  std::vector<double> out(weights.size());
  double total = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    total += weights[j];
    out[j] = total;
  }
  return out;
}

// Runs body(index) for index in [0, count), striding indices over workers.
template <typename Body>
void ParallelFor(std::int64_t count, int threads, Body body) {
  const int workers = static_cast<int>(std::min<std::int64_t>(std::max(threads, 1), std::max<std::int64_t>(count, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t i = w; i < count; i += workers) body(i, w);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

WalkSampler::WalkSampler(const MarkovChainModel& model, const Assortment& s)
    : n_(model.n()), offered_(s.Indicator(model.n())), mu_(StoppingVector(model, s)) {
  for (int i : s) {
    if (!(mu_[i] >= 0.0 && mu_[i] <= 1.0)) {
      throw InvalidInput("stopping probability of product " + std::to_string(i) +
                         " is outside [0, 1]");
    }
  }
  arrival_ = Cumulative(model.lambda().transpose());
  rows_.reserve(n_);
  for (int i = 0; i < n_; ++i) rows_.push_back(Cumulative(model.rho().row(i)));
}

int WalkSampler::Draw(const std::vector<double>& cumulative, RandomStream& rng) const {
  const double u = rng.Uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  int j = static_cast<int>(it - cumulative.begin());
  if (j >= static_cast<int>(cumulative.size())) j = static_cast<int>(cumulative.size()) - 1;
  // Skip zero-probability states that share a cumulative value with their
  // predecessor (only possible when u lands exactly on a boundary).
  while (j > 0 && cumulative[j] == cumulative[j - 1]) --j;
  return j;
}

WalkOutcome WalkSampler::Sample(RandomStream& rng) const {
  int state = Draw(arrival_, rng);
  WalkOutcome out;
  while (state != 0) {
    if (offered_[state] && rng.Uniform() < mu_[state]) {
      out.chosen = state;
      return out;
    }
    if (++out.steps > kWalkStepCap) {
      throw NonTermination("walk exceeded " + std::to_string(kWalkStepCap) +
                           " transitions; the model likely violates the spectral condition");
    }
    state = Draw(rows_[state - 1], rng);
  }
  return out;
}

WalkOutcome simulate_walk(const MarkovChainModel& model, const Assortment& s, std::uint64_t seed) {
  RandomStream rng(seed);
  return WalkSampler(model, s).Sample(rng);
}

Vector simulate_frequencies(const MarkovChainModel& model, const Assortment& s,
                            std::int64_t walks, std::uint64_t seed, int threads) {
  if (walks <= 0) throw InvalidInput("number of walks must be positive");
  const WalkSampler sampler(model, s);
  std::vector<int> chosen(walks);
  ParallelFor(walks, threads, [&](std::int64_t w, int) {
    RandomStream rng(seed, static_cast<std::uint64_t>(w));
    chosen[w] = sampler.Sample(rng).chosen;
  });
  Vector freq = Vector::Zero(model.n() + 1);
  for (int c : chosen) freq[c] += 1.0;
  return freq / static_cast<double>(walks);
}

AssortmentSampler AssortmentSampler::UniformNonempty(int n) {
  if (n < 1 || n > 62) throw InvalidInput("uniform assortment sampler needs 1 <= n <= 62");
  return AssortmentSampler(n, 0);
}

AssortmentSampler AssortmentSampler::FixedSize(int n, int k) {
  if (n < 1 || k < 1 || k > n) throw InvalidInput("fixed-size sampler needs 1 <= k <= n");
  return AssortmentSampler(n, k);
}

Assortment AssortmentSampler::Draw(RandomStream& rng) const {
  if (k_ == 0) {
    const std::uint64_t mask = 1 + rng.Below((std::uint64_t{1} << n_) - 1);
    return Assortment::FromMask(mask, n_);
  }
  // Partial Fisher-Yates over 1..n.
  std::vector<int> ids(n_);
  for (int i = 0; i < n_; ++i) ids[i] = i + 1;
  for (int i = 0; i < k_; ++i) {
    const int j = i + static_cast<int>(rng.Below(n_ - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k_);
  return Assortment(std::move(ids));
}

ChoiceDataset generate_dataset(const MarkovChainModel& model, const Matrix& features,
                               const AssortmentSampler& sampler, std::int64_t t,
                               std::uint64_t seed, int threads) {
  if (t <= 0) throw InvalidInput("dataset size T must be positive");
  if (sampler.n() != model.n()) throw InvalidInput("sampler and model disagree on n");
  std::vector<Observation> obs(t);
  ParallelFor(t, threads, [&](std::int64_t index, int) {
    RandomStream rng(seed, static_cast<std::uint64_t>(index));
    Observation& o = obs[index];
    o.offered = sampler.Draw(rng);
    o.choice = WalkSampler(model, o.offered).Sample(rng).chosen;
  });
  return ChoiceDataset(model.n(), features, std::move(obs));
}

GmnlModel ModelFromParams(const GmnlParams& params, const Matrix& features) {
  const Vector w = Attractions(params.beta, features);
  const double z = w.sum();
  if (!std::isfinite(z)) throw NumericalFailure("attractions overflow");
  return GmnlModel(w / z, params.alpha * z);
}

ChoiceDataset generate_dataset(const GmnlParams& params, const Matrix& features,
                               const AssortmentSampler& sampler, std::int64_t t,
                               std::uint64_t seed, int threads) {
  if (t <= 0) throw InvalidInput("dataset size T must be positive");
  const Vector v = Attractions(params.beta, features);
  if (!v.allFinite()) throw NumericalFailure("attractions overflow");
  const int n = static_cast<int>(features.rows()) - 1;
  if (sampler.n() != n) throw InvalidInput("sampler and features disagree on n");
  std::vector<Observation> obs(t);
  ParallelFor(t, threads, [&](std::int64_t index, int) {
    RandomStream rng(seed, static_cast<std::uint64_t>(index));
    Observation& o = obs[index];
    o.offered = sampler.Draw(rng);
    const ChoiceProbabilities p =
        AttractionChoiceProbabilities(std::span<const double>(v.data(), v.size()), params.alpha, o.offered);
    // Inverse CDF over (0, members of S); falls back to the last option on round-off.
    double u = rng.Uniform() - p.no_purchase();
    o.choice = 0;
    if (u >= 0.0) {
      o.choice = o.offered.max_member();
      for (int i : o.offered) {
        u -= p[i];
        if (u < 0.0) {
          o.choice = i;
          break;
        }
      }
    }
  });
  return ChoiceDataset(n, features, std::move(obs));
}

Matrix SyntheticFeatures(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 2) throw InvalidInput("synthetic features need n >= 1 and d >= 2");
  RandomStream rng(seed);
  Matrix x = Matrix::Zero(n + 1, d);
  x(0, 0) = 1.0;
  for (int j = 1; j <= n; ++j) {
    for (int c = 1; c < d; ++c) x(j, c) = rng.Normal();
  }
  return x;
}

Vector SyntheticBeta(const Matrix& features, double alpha) {
  const auto d = features.cols();
  const auto n = features.rows() - 1;
  if (d < 2 || n < 1 || n > 62) throw InvalidInput("synthetic beta needs d >= 2 and 1 <= n <= 62");
  Vector beta = Vector::Zero(d);
  for (Eigen::Index c = 1; c < d; ++c) beta[c] = (c % 2 == 1 ? 0.5 : -0.5) / static_cast<double>(c);
  // Each product is offered with probability 2^(n-1) / (2^n - 1).
  const double inclusion = std::ldexp(1.0, static_cast<int>(n) - 1) / (std::ldexp(1.0, static_cast<int>(n)) - 1.0);
  const Vector w = (features.bottomRows(n) * beta).array().exp();
  beta[0] = -alpha * inclusion * w.sum();
  return beta;
}

NoPurchaseCurve no_purchase_curve(int n, const std::vector<double>& alphas, int kmax) {
  if (n < 1 || kmax < 1 || kmax > n) throw InvalidInput("no-purchase curve needs 1 <= kmax <= n");
  NoPurchaseCurve curve;
  curve.alphas = alphas;
  for (double alpha : alphas) {
    const GmnlModel model = GmnlModel::Homogeneous(n, alpha);
    std::vector<double> row;
    std::vector<int> members;
    for (int k = 1; k <= kmax; ++k) {
      members.push_back(k);
      row.push_back(gmnl_choice_probability(model, 0, Assortment(members)));
    }
    curve.values.push_back(std::move(row));
  }
  return curve;
}

MarkovChainModel StarChain(int n, double alpha) {
  if (n < 3) throw InvalidInput("star graph needs n >= 3");
  Vector lambda = Vector::Constant(n + 1, 1.0 / n);
  lambda[0] = 0.0;
  Matrix rho = Matrix::Zero(n, n + 1);
  rho(0, 0) = 1.0 / n;
  for (int j = 2; j <= n; ++j) rho(0, j) = 1.0 / n;
  for (int i = 2; i <= n; ++i) {
    rho(i - 1, 0) = 0.5;
    rho(i - 1, 1) = 0.5;
  }
  return MarkovChainModel(std::move(lambda), std::move(rho), alpha);
}

std::vector<double> StarPrices(int n, double p, double big_p) {
  if (!(p > 0.0) || !(p < big_p)) throw InvalidInput("star graph needs 0 < p < P");
  std::vector<double> prices(n, big_p);
  prices[0] = p;
  return prices;
}

OptimizationResult star_graph_experiment(int n, double p, double big_p, double alpha) {
  const MarkovChainModel model = StarChain(n, alpha);
  const std::vector<double> prices = StarPrices(n, p, big_p);
  return brute_force_optimal(
      [&](const Assortment& s) { return expected_revenue(model, s, prices); }, n);
}

std::vector<StarSweepRow> star_graph_sweep(int n, double p, double big_p,
                                           const std::vector<double>& alphas) {
  std::vector<StarSweepRow> rows;
  for (double alpha : alphas) {
    OptimizationResult r = star_graph_experiment(n, p, big_p, alpha);
    const bool hub_only = r.assortment == Assortment{1};
    rows.push_back({alpha, std::move(r), hub_only});
  }
  return rows;
}

}  // namespace gmchoice
