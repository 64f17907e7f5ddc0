#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gmchoice::cli {

// Flags shared by every subcommand.
struct CommonFlags {
  std::uint64_t seed = 1;
  double epsilon = 0.1;
  std::string out;
  double alpha_max = 50.0;
  int threads = 1;
};

struct FitArgs {
  std::string data;
  std::string features;
  std::string model = "gmnl";
  int max_iterations = 100;
  bool drop_multi_click = false;
};

struct OptimizeArgs {
  std::string model_file;
  std::string features;
  std::string prices;
  std::string method = "fptas";
};

struct SimulateArgs {
  std::string model_file;
  std::string features;
  std::int64_t t = 1000;
  std::string assortment;
  bool fixed_assortment = false;
  int k = 0;
};

struct FigureArgs {
  std::string name;
  int n = 0;  // 0: 15 for no-purchase, 10 otherwise
  int kmax = 0;
  std::string alphas;
  double p = 0.9;
  double big_p = 1.0;
  std::string data;
  std::string features;
  std::int64_t t = 5000;
  double alpha_true = 2.0;
  int d = 4;
};

struct EvaluateArgs {
  std::vector<std::string> params;
  std::string holdout;
  std::string features;
};

struct GenInstanceArgs {
  std::string c;
  double alpha = 1.0;
};

int RunFit(const FitArgs& args, const CommonFlags& common);
int RunOptimize(const OptimizeArgs& args, const CommonFlags& common);
int RunSimulate(const SimulateArgs& args, const CommonFlags& common);
int RunFigure(const FigureArgs& args, const CommonFlags& common);
int RunEvaluate(const EvaluateArgs& args, const CommonFlags& common);
int RunGenInstance(const GenInstanceArgs& args, const CommonFlags& common);

}  // namespace gmchoice::cli
