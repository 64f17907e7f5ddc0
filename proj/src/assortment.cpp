#include "gmchoice/assortment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "gmchoice/errors.hpp"

namespace gmchoice {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-12;

// ceil() that ignores round-off just above an integer, so that for example
// ceil(12 / 0.1) is 120 rather than 121.
std::int64_t RobustCeil(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(x));
}

// True when `candidate` should replace `incumbent`: strictly higher revenue,
// or a tie broken toward the lexicographically smaller set.
bool Improves(double revenue, const Assortment& candidate, double best_revenue,
              const Assortment& incumbent) {
  const double scale = std::max(1.0, std::abs(best_revenue));
  if (revenue > best_revenue + kTieTolerance * scale) return true;
  if (revenue < best_revenue - kTieTolerance * scale) return false;
  return candidate < incumbent;
}

struct Candidate {
  std::optional<Assortment> assortment;
  double revenue = kNegInf;
  std::int64_t states = 0;
};

// Evaluates every guess (optionally on worker threads) and merges the
// candidates in guess order so the result does not depend on scheduling.
template <typename EvaluateGuess>
OptimizationResult RunGuesses(std::int64_t guess_count, const FptasConfig& config,
                              OptimizationMethod method, EvaluateGuess evaluate) {
  std::vector<Candidate> candidates(static_cast<size_t>(guess_count));
  const auto run_range = [&](std::int64_t first, std::int64_t stride) {
    for (std::int64_t g = first; g < guess_count; g += stride) candidates[g] = evaluate(g);
  };
  int workers = 1;
  if (config.parallel_guesses) {
    workers = config.threads > 0 ? config.threads
                                 : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<int>(std::min<std::int64_t>(workers, std::max<std::int64_t>(1, guess_count)));
  }
  if (workers <= 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(run_range, t, workers);
    for (auto& th : pool) th.join();
  }

  OptimizationResult result;
  result.method = method;
  result.guesses_evaluated = guess_count;
  result.revenue = 0.0;  // the empty assortment is always available
  for (const Candidate& c : candidates) {
    result.dp_states += c.states;
    if (c.assortment && Improves(c.revenue, *c.assortment, result.revenue, result.assortment)) {
      result.assortment = *c.assortment;
      result.revenue = c.revenue;
    }
  }
  return result;
}

}  // namespace

void FptasConfig::Validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
  if (threads < 0) throw InvalidInput("thread count must be nonnegative");
}

std::string ToString(OptimizationMethod method) {
  switch (method) {
    case OptimizationMethod::kBruteForce:
      return "brute";
    case OptimizationMethod::kFptasRank1:
      return "fptas-rank1";
    case OptimizationMethod::kFptasRankK:
      return "fptas-rankK";
  }
  return "unknown";
}

std::vector<double> GuessGrid::Axis(double lo, double hi, double epsilon) {
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidInput("guess range must satisfy 0 < lo <= hi");
  const auto steps = RobustCeil(std::log(hi / lo) / std::log1p(epsilon));
  std::vector<double> axis;
  axis.reserve(static_cast<size_t>(steps) + 1);
  for (std::int64_t l = 0; l <= steps; ++l) {
    axis.push_back(lo * std::pow(1.0 + epsilon, static_cast<double>(l)));
  }
  return axis;
}

GuessGrid GuessGrid::Rank1(const GmnlModel& model, double epsilon) {
  const auto products = model.v().tail(model.n());
  GuessGrid grid;
  grid.axes_.push_back(Axis(products.minCoeff(), model.n() * products.maxCoeff(), epsilon));
  return grid;
}

GuessGrid GuessGrid::RankK(const LowRankModel& model, double epsilon) {
  // The guessed quantity V_k(S+) includes the no-purchase row, so it never
  // exceeds the column total.
  GuessGrid grid;
  for (int k = 0; k < model.rank(); ++k) {
    const auto column = model.v().col(k);
    grid.axes_.push_back(Axis(column.tail(model.n()).minCoeff(), column.sum(), epsilon));
  }
  return grid;
}

std::int64_t GuessGrid::size() const {
  std::int64_t total = 1;
  for (const auto& axis : axes_) total *= static_cast<std::int64_t>(axis.size());
  return total;
}

std::vector<double> GuessGrid::At(std::int64_t index) const {
  std::vector<double> guess(axes_.size());
  for (int k = dimensions() - 1; k >= 0; --k) {
    const auto len = static_cast<std::int64_t>(axes_[k].size());
    guess[k] = axes_[k][index % len];
    index /= len;
  }
  return guess;
}

OptimizationResult brute_force_optimal(const RevenueFunction& revenue, int n) {
  if (n < 0) throw InvalidInput("product count must be nonnegative");
  if (n > kBruteForceMaxProducts) {
    throw ResourceGuard("brute force is limited to n <= " +
                        std::to_string(kBruteForceMaxProducts) + " products (got " +
                        std::to_string(n) + "); use the FPTAS instead");
  }
  OptimizationResult result;
  result.method = OptimizationMethod::kBruteForce;
  result.revenue = revenue(Assortment{});
  AssortmentBuffer buffer;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    const Assortment& s = buffer.Load(mask, n);
    const double r = revenue(s);
    if (Improves(r, s, result.revenue, result.assortment)) {
      result.revenue = r;
      result.assortment = s;
    }
  }
  result.guesses_evaluated = static_cast<std::int64_t>(count);
  return result;
}

KnapsackSolution SolveKnapsack(std::span<const std::int64_t> weights,
                               std::span<const double> values, std::int64_t capacity) {
  const size_t n = weights.size();
  if (values.size() != n) throw InvalidInput("weights and values differ in length");
  KnapsackSolution out;
  if (capacity < 0) {
    out.value = kNegInf;
    return out;
  }
  const auto width = static_cast<size_t>(capacity) + 1;
  // best[i] after processing items 1..k: max value with total weight <= i.
  std::vector<double> best(width, 0.0);
  std::vector<char> take(n * width, 0);
  for (size_t k = 0; k < n; ++k) {
    const std::int64_t w = weights[k];
    for (std::int64_t i = capacity; i >= 0 && i >= w; --i) {
      const double with = best[i - w] + values[k];
      if (with > best[i]) {
        best[i] = with;
        take[k * width + i] = 1;
      }
    }
  }
  out.value = best[capacity];
  out.states = static_cast<std::int64_t>(n * width);
  std::vector<int> items;
  std::int64_t i = capacity;
  for (size_t k = n; k-- > 0;) {
    if (take[k * width + i]) {
      items.push_back(static_cast<int>(k) + 1);
      i -= weights[k];
    }
  }
  out.items = Assortment(std::move(items));
  return out;
}

OptimizationResult fptas_gmnl(const GmnlModel& model, std::span<const double> prices,
                              const FptasConfig& config) {
  config.Validate();
  CheckPrices(prices, model.n());
  const int n = model.n();
  const double eps = config.epsilon;
  const GuessGrid grid = GuessGrid::Rank1(model, eps);
  const std::int64_t capacity = RobustCeil(n / eps) + n;

  std::vector<double> values(n);
  for (int j = 1; j <= n; ++j) values[j - 1] = model.v()[j] * prices[j - 1];

  return RunGuesses(grid.size(), config, OptimizationMethod::kFptasRank1, [&](std::int64_t g) {
    const double h = grid.At(g)[0];
    const double unit = eps * h / n;
    std::vector<std::int64_t> weights(n);
    for (int j = 1; j <= n; ++j) weights[j - 1] = RobustCeil(model.v()[j] / unit);
    KnapsackSolution sol = SolveKnapsack(weights, values, capacity);
    Candidate c;
    c.states = sol.states;
    c.revenue = gmnl_revenue(model, sol.items, prices);
    c.assortment = std::move(sol.items);
    return c;
  });
}

namespace {

// Mixed-radix indexing for K-dimensional integer boxes [0..radix)^K.
std::int64_t Flatten(std::span<const std::int64_t> coords, std::int64_t radix) {
  std::int64_t index = 0;
  for (auto c : coords) index = index * radix + c;
  return index;
}

void Unflatten(std::int64_t index, std::int64_t radix, std::span<std::int64_t> coords) {
  for (size_t k = coords.size(); k-- > 0;) {
    coords[k] = index % radix;
    index /= radix;
  }
}

std::int64_t IntPow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void CheckProgram(const BoundedProgram& p) {
  if (p.k < 1 || p.k > kFptasMaxRank) throw InvalidInput("program rank must lie in [1, 3]");
  if (p.weight.size() != p.value.size()) throw InvalidInput("program weight/value mismatch");
  if (static_cast<int>(p.offset.size()) != p.k) throw InvalidInput("program offset size");
  if (p.lower < 0 || p.upper < p.lower) throw InvalidInput("program bounds");
}

}  // namespace

BoundedSolution SolveBoundedProgram(const BoundedProgram& p) {
  CheckProgram(p);
  const int k = p.k;
  const size_t n = p.value.size();
  const std::int64_t radix = p.upper + 1;
  const std::int64_t cells = IntPow(radix, k);
  BoundedSolution out;

  for (int c = 0; c < k; ++c) {
    if (p.offset[c] > p.upper) return out;
  }
  std::vector<double> best(static_cast<size_t>(cells), kNegInf);
  std::vector<char> take(n * static_cast<size_t>(cells), 0);
  best[Flatten(p.offset, radix)] = 0.0;

  std::vector<std::int64_t> coords(k);
  std::vector<double> next;
  for (size_t m = 0; m < n; ++m) {
    next = best;
    const auto& w = p.weight[m];
    for (std::int64_t cell = 0; cell < cells; ++cell) {
      if (best[cell] == kNegInf) continue;
      Unflatten(cell, radix, coords);
      bool fits = true;
      for (int c = 0; c < k; ++c) {
        coords[c] += w[c];
        if (coords[c] > p.upper) fits = false;
      }
      if (!fits) continue;
      const std::int64_t target = Flatten(coords, radix);
      const double with = best[cell] + p.value[m];
      if (with > next[target]) {
        next[target] = with;
        take[m * cells + target] = 1;
      }
    }
    best.swap(next);
  }
  out.states = static_cast<std::int64_t>(n) * cells;

  std::int64_t chosen = -1;
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    if (best[cell] == kNegInf) continue;
    Unflatten(cell, radix, coords);
    const bool above = std::all_of(coords.begin(), coords.end(),
                                   [&](std::int64_t x) { return x >= p.lower; });
    if (above && (chosen < 0 || best[cell] > best[chosen])) chosen = cell;
  }
  if (chosen < 0) return out;

  out.feasible = true;
  out.value = best[chosen];
  std::vector<int> items;
  std::int64_t cell = chosen;
  for (size_t m = n; m-- > 0;) {
    if (take[m * cells + cell]) {
      items.push_back(static_cast<int>(m) + 1);
      Unflatten(cell, radix, coords);
      for (int c = 0; c < k; ++c) coords[c] -= p.weight[m][c];
      cell = Flatten(coords, radix);
    }
  }
  out.items = Assortment(std::move(items));
  return out;
}

BoundedSolution SolveBoundedProgramDense(const BoundedProgram& p) {
  CheckProgram(p);
  const int k = p.k;
  const size_t n = p.value.size();
  const std::int64_t lradix = p.lower + 1;
  const std::int64_t uradix = p.upper + 1;
  const std::int64_t lcells = IntPow(lradix, k);
  const std::int64_t ucells = IntPow(uradix, k);
  const std::int64_t cells = lcells * ucells;
  BoundedSolution out;

  // R(l, u, m): best value of a subset of {1..m} whose weight sum lies in
  // [l, u] coordinatewise. Negative l is equivalent to l = 0; negative u is
  // infeasible.
  std::vector<std::int64_t> lc(k), uc(k);
  std::vector<double> prev(static_cast<size_t>(cells));
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    Unflatten(cell / ucells, lradix, lc);
    prev[cell] = std::all_of(lc.begin(), lc.end(), [](std::int64_t x) { return x == 0; })
                     ? 0.0
                     : kNegInf;
  }
  std::vector<char> take(n * static_cast<size_t>(cells), 0);
  std::vector<double> cur(static_cast<size_t>(cells));
  for (size_t m = 0; m < n; ++m) {
    const auto& w = p.weight[m];
    for (std::int64_t cell = 0; cell < cells; ++cell) {
      double value = prev[cell];
      Unflatten(cell / ucells, lradix, lc);
      Unflatten(cell % ucells, uradix, uc);
      bool ok = true;
      for (int c = 0; c < k; ++c) {
        lc[c] = std::max<std::int64_t>(lc[c] - w[c], 0);
        uc[c] -= w[c];
        if (uc[c] < 0) ok = false;
      }
      if (ok) {
        const double rest = prev[Flatten(lc, lradix) * ucells + Flatten(uc, uradix)];
        if (rest != kNegInf && rest + p.value[m] > value) {
          value = rest + p.value[m];
          take[m * cells + cell] = 1;
        }
      }
      cur[cell] = value;
    }
    prev.swap(cur);
  }
  out.states = static_cast<std::int64_t>(n) * cells;

  // Query R(L - offset, U - offset, n).
  for (int c = 0; c < k; ++c) {
    lc[c] = std::max<std::int64_t>(p.lower - p.offset[c], 0);
    uc[c] = p.upper - p.offset[c];
    if (uc[c] < 0) return out;
  }
  std::int64_t cell = Flatten(lc, lradix) * ucells + Flatten(uc, uradix);
  if (prev[cell] == kNegInf) return out;
  out.feasible = true;
  out.value = prev[cell];
  std::vector<int> items;
  for (size_t m = n; m-- > 0;) {
    if (!take[m * cells + cell]) continue;
    items.push_back(static_cast<int>(m) + 1);
    Unflatten(cell / ucells, lradix, lc);
    Unflatten(cell % ucells, uradix, uc);
    for (int c = 0; c < k; ++c) {
      lc[c] = std::max<std::int64_t>(lc[c] - p.weight[m][c], 0);
      uc[c] -= p.weight[m][c];
    }
    cell = Flatten(lc, lradix) * ucells + Flatten(uc, uradix);
  }
  out.items = Assortment(std::move(items));
  return out;
}

bool BuildLowRankProgram(const LowRankModel& model, std::span<const double> prices,
                         std::span<const double> guess, double epsilon, BoundedProgram* out) {
  const int n = model.n();
  const int k = model.rank();
  const Eigen::Map<const Vector> h(guess.data(), static_cast<Eigen::Index>(guess.size()));

  // mu_i(h) = exp(-alpha sum_k h_k u_ik) and H(h) = sum_i (1 - mu_i(h)) v_i u_i^T,
  // the orientation the expanded chain needs (see lowrank_revenue).
  Vector mu(n + 1);
  mu[0] = 0.0;
  Matrix estimate = Matrix::Zero(k, k);
  for (int i = 1; i <= n; ++i) {
    mu[i] = std::exp(-model.alpha() * model.u().row(i - 1).dot(h));
    estimate += (1.0 - mu[i]) * model.v().row(i).transpose() * model.u().row(i - 1);
  }
  if (!(SpectralRadius(estimate) < 1.0)) return false;
  const Matrix inverse = (Matrix::Identity(k, k) - estimate).inverse();
  if (!inverse.allFinite() || inverse.minCoeff() < -1e-12) return false;

  // a = sum_i lambda_i (1 - mu_i(h)) u_i, so the spill-over term of product m
  // is p_m mu_m(h) a^T [I - H]^{-1} v_m.
  Vector a = Vector::Zero(k);
  for (int i = 1; i <= n; ++i) {
    a += model.lambda()[i] * (1.0 - mu[i]) * model.u().row(i - 1).transpose();
  }
  const Eigen::RowVectorXd reach = a.transpose() * inverse;

  BoundedProgram& p = *out;
  p.k = k;
  p.lower = RobustCeil(n / epsilon);
  p.upper = p.lower + n;
  p.weight.assign(n, std::vector<std::int64_t>(k));
  p.value.assign(n, 0.0);
  p.offset.assign(k, 0);
  for (int c = 0; c < k; ++c) {
    const double unit = epsilon * h[c] / n;
    p.offset[c] = RobustCeil(model.v()(0, c) / unit);
    for (int m = 1; m <= n; ++m) p.weight[m - 1][c] = RobustCeil(model.v()(m, c) / unit);
  }
  for (int m = 1; m <= n; ++m) {
    const double pm = prices[m - 1];
    p.value[m - 1] = model.lambda()[m] * mu[m] * pm +
                     pm * mu[m] * reach.dot(model.v().row(m));
  }
  return true;
}

OptimizationResult fptas_lowrank(const LowRankModel& model, std::span<const double> prices,
                                 const FptasConfig& config) {
  config.Validate();
  CheckPrices(prices, model.n());
  if (model.rank() > kFptasMaxRank) {
    throw InvalidInput("fptas_lowrank supports rank K <= 3 (state space grows as (n/eps)^{2K})");
  }
  const GuessGrid grid = GuessGrid::RankK(model, config.epsilon);
  return RunGuesses(grid.size(), config, OptimizationMethod::kFptasRankK, [&](std::int64_t g) {
    const std::vector<double> guess = grid.At(g);
    Candidate c;
    BoundedProgram program;
    if (!BuildLowRankProgram(model, prices, guess, config.epsilon, &program)) return c;
    BoundedSolution sol = config.dense_rank_k_table ? SolveBoundedProgramDense(program)
                                                    : SolveBoundedProgram(program);
    c.states = sol.states;
    if (!sol.feasible) return c;
    c.revenue = lowrank_revenue(model, sol.items, prices);
    c.assortment = std::move(sol.items);
    return c;
  });
}

namespace {

double CheckPartitionInput(std::span<const int> c) {
  if (c.empty()) throw InvalidInput("partition instance needs at least one integer");
  double total = 0.0;
  for (int x : c) {
    if (x <= 0) throw InvalidInput("partition integers must be positive");
    total += x;
  }
  return total / 2.0;
}

}  // namespace

PartitionInstance build_partition_instance_small_alpha(std::span<const int> c, double alpha) {
  const double t = CheckPartitionInput(c);
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidInput("small-alpha construction needs 0 <= alpha <= 1; use the large-alpha one");
  }
  const int n = static_cast<int>(c.size());
  const double scale = 2.0 * t + 1.0;
  Vector v(n + 1);
  v[0] = 1.0 / scale;
  for (int i = 1; i <= n; ++i) v[i] = c[i - 1] / scale;
  const double c0 = v[0] * std::exp(alpha * v[0]);
  const double growth = std::exp(alpha * t / scale);
  const double base = 1.0 / (scale * c0) + (growth - 1.0) / t;
  std::vector<double> prices(n, base);
  prices[0] = base + 1.0 / c[0];
  const double target = (t / (scale * c0) + growth) / (t + scale * c0 * growth);
  return PartitionInstance{GmnlModel(std::move(v), alpha), std::move(prices), target};
}

PartitionInstance build_partition_instance_large_alpha(std::span<const int> c, double alpha) {
  const double t = CheckPartitionInput(c);
  if (!(alpha > 2.0) || !std::isfinite(alpha)) {
    throw InvalidInput("large-alpha construction needs alpha > 2");
  }
  const int n = static_cast<int>(c.size());
  Vector v(n + 1);
  v[0] = 1.0 - 2.0 / alpha;
  for (int i = 1; i <= n; ++i) v[i] = c[i - 1] / (t * alpha);
  const double c0 = v[0] * std::exp(alpha * v[0]);
  const double target = 1.0 / (1.0 + alpha * c0 * std::exp(1.0));
  return PartitionInstance{GmnlModel(std::move(v), alpha), std::vector<double>(n, 1.0), target};
}

}  // namespace gmchoice
