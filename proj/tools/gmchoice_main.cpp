#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gmchoice/errors.hpp"

int main(int argc, char** argv) {
  using namespace gmchoice::cli;

  CLI::App app{"Generalized Markov chain choice models: fit, optimize, simulate"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--seed", common.seed, "Root random seed");
  app.add_option("--epsilon", common.epsilon, "FPTAS accuracy parameter")
      ->check(CLI::Range(1e-6, 1.0));
  app.add_option("--out", common.out, "Output file");
  app.add_option("--alpha-max", common.alpha_max, "Upper bound for alpha during fitting")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1, 256));

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate MNL or GMNL parameters by maximum likelihood");
  fit_cmd->add_option("--data", fit.data, "Dataset CSV (t,assortment,choice)")->required();
  fit_cmd->add_option("--features", fit.features, "Features CSV (id,f1..fd)")->required();
  fit_cmd->add_option("--model", fit.model, "mnl or gmnl")
      ->check(CLI::IsMember({"mnl", "gmnl"}));
  fit_cmd->add_option("--max-iterations", fit.max_iterations, "Outer iterations for gmnl")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--drop-multi-click", fit.drop_multi_click,
                    "Skip rows that record more than one choice");

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Find a revenue-maximising assortment");
  opt_cmd->add_option("--model-file", opt.model_file, "Params, model or instance JSON")->required();
  opt_cmd->add_option("--features", opt.features, "Features CSV for beta-parameterised models");
  opt_cmd->add_option("--prices", opt.prices, "Prices JSON (array); optional for instance files");
  opt_cmd->add_option("--method", opt.method, "brute or fptas")
      ->check(CLI::IsMember({"brute", "fptas"}));

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic choice dataset");
  sim_cmd->add_option("--model-file,--params", sim.model_file, "Params or model JSON")->required();
  sim_cmd->add_option("--features", sim.features, "Features CSV for beta-parameterised models");
  sim_cmd->add_option("--T", sim.t, "Number of observations");
  auto* fixed = sim_cmd->add_option("--assortment", sim.assortment,
                                    "Offer this fixed assortment (e.g. 1;3) every time");
  sim_cmd->add_option("--k", sim.k, "Draw assortments of exactly k products")
      ->check(CLI::PositiveNumber);

  FigureArgs fig;
  auto* fig_cmd = app.add_subcommand("figure", "Emit figure data as a whitespace-separated table");
  fig_cmd->add_option("name", fig.name, "no-purchase, star or convergence")->required();
  fig_cmd->add_option("--n", fig.n, "Number of products");
  fig_cmd->add_option("--kmax", fig.kmax, "Largest assortment size (no-purchase)");
  fig_cmd->add_option("--alphas", fig.alphas, "Comma-separated alpha values");
  fig_cmd->add_option("--p", fig.p, "Hub price (star)");
  fig_cmd->add_option("--P", fig.big_p, "Leaf price (star)");
  fig_cmd->add_option("--data", fig.data, "Dataset CSV (convergence)");
  fig_cmd->add_option("--features", fig.features, "Features CSV (convergence)");
  fig_cmd->add_option("--T", fig.t, "Synthetic observations when no dataset is given");
  fig_cmd->add_option("--alpha-true", fig.alpha_true, "Synthetic generating alpha");
  fig_cmd->add_option("--d", fig.d, "Synthetic feature dimension");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compare fitted models by holdout ROC AUC");
  eval_cmd->add_option("--params", eval.params, "Params JSON (repeatable)")->required();
  eval_cmd->add_option("--holdout", eval.holdout, "Holdout dataset CSV")->required();
  eval_cmd->add_option("--features", eval.features, "Features CSV")->required();

  GenInstanceArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-instance", "Build a GMNL instance from a PARTITION input");
  gen_cmd->add_option("--c", gen.c, "Comma-separated positive integers")->required();
  gen_cmd->add_option("--alpha", gen.alpha, "alpha <= 1 or alpha > 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(gmchoice::ExitCode::kInvalidInput);
  }

  try {
    if (fit_cmd->parsed()) return RunFit(fit, common);
    if (opt_cmd->parsed()) return RunOptimize(opt, common);
    if (sim_cmd->parsed()) {
      sim.fixed_assortment = fixed->count() > 0;
      return RunSimulate(sim, common);
    }
    if (fig_cmd->parsed()) return RunFigure(fig, common);
    if (eval_cmd->parsed()) return RunEvaluate(eval, common);
    if (gen_cmd->parsed()) return RunGenInstance(gen, common);
  } catch (const gmchoice::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
