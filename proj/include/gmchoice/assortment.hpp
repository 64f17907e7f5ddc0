#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmchoice/chain_core.hpp"
#include "gmchoice/gmnl.hpp"
#include "gmchoice/lowrank.hpp"

namespace gmchoice {

inline constexpr int kBruteForceMaxProducts = 22;
inline constexpr int kFptasMaxRank = 3;

struct FptasConfig {
  double epsilon = 0.1;
  bool parallel_guesses = false;
  int threads = 0;  // 0: hardware concurrency when parallel_guesses is set
  // Use the literal (l, u, m) table for the rank-K program instead of the
  // exact-sum table. Both return the same optimum; the literal table exists
  // for instrumentation and cross-checking on small instances.
  bool dense_rank_k_table = false;

  void Validate() const;
};

enum class OptimizationMethod { kBruteForce, kFptasRank1, kFptasRankK };

std::string ToString(OptimizationMethod method);

struct OptimizationResult {
  Assortment assortment;
  double revenue = 0.0;
  OptimizationMethod method = OptimizationMethod::kBruteForce;
  std::int64_t guesses_evaluated = 0;
  std::int64_t dp_states = 0;
};

// Geometric guess values lo (1+eps)^l, l = 0..L, with
// L = ceil(log(hi/lo) / log(1+eps)) so the last value is >= hi.
class GuessGrid {
 public:
  static GuessGrid Rank1(const GmnlModel& model, double epsilon);
  static GuessGrid RankK(const LowRankModel& model, double epsilon);
  static std::vector<double> Axis(double lo, double hi, double epsilon);

  int dimensions() const { return static_cast<int>(axes_.size()); }
  const std::vector<double>& axis(int k) const { return axes_[k]; }
  std::int64_t size() const;
  // Guess number `index` in row-major order over the axes.
  std::vector<double> At(std::int64_t index) const;

 private:
  std::vector<std::vector<double>> axes_;
};

using RevenueFunction = std::function<double(const Assortment&)>;

// Exhaustive search over all 2^n subsets. Ties (within 1e-12 relative) go to
// the lexicographically smallest member list.
OptimizationResult brute_force_optimal(const RevenueFunction& revenue, int n);

// Knapsack over integer weights: maximum sum of values over subsets with
// total weight <= capacity. Ties exclude the item.
struct KnapsackSolution {
  double value = 0.0;
  Assortment items;  // 1-based
  std::int64_t states = 0;
};
KnapsackSolution SolveKnapsack(std::span<const std::int64_t> weights,
                               std::span<const double> values, std::int64_t capacity);

OptimizationResult fptas_gmnl(const GmnlModel& model, std::span<const double> prices,
                              const FptasConfig& config);

// Per-guess data for the rank-K program: each product m contributes `value[m]`
// and the integer vector `weight[m]`; the no-purchase row adds a fixed
// `offset`. Feasible sets satisfy lower <= offset + sum weight <= upper
// coordinatewise.
struct BoundedProgram {
  int k = 0;
  std::vector<std::vector<std::int64_t>> weight;  // n rows of K entries
  std::vector<double> value;                      // n entries
  std::vector<std::int64_t> offset;               // K entries
  std::int64_t lower = 0;
  std::int64_t upper = 0;
};

struct BoundedSolution {
  bool feasible = false;
  double value = 0.0;
  Assortment items;
  std::int64_t states = 0;
};

// Table indexed by the exact discretised sum, (upper+1)^K x (n+1).
BoundedSolution SolveBoundedProgram(const BoundedProgram& program);
// Literal table R(l, u, m) over [0..L]^K x [0..U]^K x [1..n].
BoundedSolution SolveBoundedProgramDense(const BoundedProgram& program);

// Builds the per-guess program for fptas_lowrank; returns false when
// I - H(h) is not invertible with a nonnegative inverse.
bool BuildLowRankProgram(const LowRankModel& model, std::span<const double> prices,
                         std::span<const double> guess, double epsilon, BoundedProgram* out);

OptimizationResult fptas_lowrank(const LowRankModel& model, std::span<const double> prices,
                                 const FptasConfig& config);

struct PartitionInstance {
  GmnlModel model;
  std::vector<double> prices;
  double target;
};

// Reduction from PARTITION for alpha <= 1 (product 1 carries the extra price
// term) and for alpha > 2 (unit prices).
PartitionInstance build_partition_instance_small_alpha(std::span<const int> c, double alpha);
PartitionInstance build_partition_instance_large_alpha(std::span<const int> c, double alpha);

}  // namespace gmchoice
