#include "commands.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "gmchoice/assortment.hpp"
#include "gmchoice/errors.hpp"
#include "gmchoice/estimation.hpp"
#include "gmchoice/io.hpp"
#include "gmchoice/simulate.hpp"

namespace gmchoice::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string RequireOut(const CommonFlags& common, const char* command) {
  if (common.out.empty()) throw InvalidInput(std::string(command) + " needs --out");
  return common.out;
}

// Writes `content` to --out when given, else to stdout.
void Emit(const CommonFlags& common, const std::string& content) {
  if (common.out.empty()) {
    std::cout << content;
  } else {
    io::WriteAtomic(common.out, content);
  }
}

void WriteManifest(io::RunManifest manifest, const CommonFlags& common, Clock::time_point start) {
  if (common.out.empty()) return;
  manifest.outputs.push_back(common.out);
  manifest.config["threads"] = std::to_string(common.threads);
  manifest.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  io::WriteAtomic(io::ManifestPath(common.out), manifest.ToJson());
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) throw InvalidInput("cannot parse list entry '" + field + "'");
    out.push_back(x);
  }
  if (out.empty()) throw InvalidInput("empty list");
  return out;
}

// A model the optimizer and simulator can work with.
struct LoadedModel {
  io::ModelFile file;
  std::optional<GmnlModel> gmnl;
  Matrix features;  // (n+1) x d; zeros when the model carries no features
};

LoadedModel LoadModel(const std::string& path, const std::string& features_path) {
  LoadedModel m{io::ReadModelJson(path), std::nullopt, Matrix()};
  if (m.file.params) {
    if (features_path.empty()) throw InvalidInput("beta-parameterised models need --features");
    m.features = io::ReadFeaturesCsv(features_path);
    if (m.features.cols() != m.file.params->beta.size()) {
      throw InvalidInput("features have " + std::to_string(m.features.cols()) +
                         " columns but the model has d = " +
                         std::to_string(m.file.params->beta.size()));
    }
    m.gmnl = ModelFromParams(*m.file.params, m.features);
    m.file.n = m.gmnl->n();
  } else if (m.file.gmnl) {
    m.gmnl = m.file.gmnl;
  }
  if (m.features.size() == 0) {
    m.features = features_path.empty() ? Matrix::Zero(m.file.n + 1, 1)
                                       : io::ReadFeaturesCsv(features_path);
  }
  if (m.features.rows() != m.file.n + 1) {
    throw InvalidInput("features must have n+1 = " + std::to_string(m.file.n + 1) + " rows");
  }
  return m;
}

MarkovChainModel ChainOf(const LoadedModel& m) {
  if (m.gmnl) return m.gmnl->ToChain();
  return m.file.lowrank->ToChain();
}

json AssortmentJson(const Assortment& s) { return json(s.members()); }

}  // namespace

int RunFit(const FitArgs& args, const CommonFlags& common) {
  const auto start = Clock::now();
  const std::string out = RequireOut(common, "fit");
  const Matrix features = io::ReadFeaturesCsv(args.features);
  io::IngestReport report;
  const ChoiceDataset data =
      io::ReadDatasetCsv(args.data, features, {args.drop_multi_click}, &report);
  if (data.size() == 0) throw InvalidInput("dataset has no usable observations");

  EstimationOptions options;
  options.alpha_max = common.alpha_max;
  options.max_iterations = args.max_iterations;
  options.beta.seed = common.seed;
  options.beta.eval.threads = common.threads;

  GmnlParams params;
  double loglik = 0.0;
  int iterations = 0;
  if (args.model == "mnl") {
    const BetaSolveReport r = solve_partial_beta(data, 0.0, Vector::Zero(data.d()), options.beta);
    params = {r.beta, 0.0};
    loglik = r.log_likelihood;
    iterations = r.iterations;
  } else {
    const EstimationResult r = estimate_gmnl(data, options);
    params = r.params;
    loglik = r.log_likelihood;
    iterations = r.iterations;
  }
  io::WriteAtomic(out, io::FormatParamsJson(args.model, data.n(), params));

  std::cout << "model " << args.model << "\n"
            << "observations " << data.size() << "\n";
  if (report.dropped_multi_click > 0) {
    std::cout << "dropped_multi_click " << report.dropped_multi_click << "\n";
  }
  std::cout << "log_likelihood " << io::FormatDouble(loglik) << "\n"
            << "iterations " << iterations << "\n"
            << "alpha " << io::FormatDouble(params.alpha) << "\n";

  WriteManifest({"fit",
                 {{"data", args.data}, {"features", args.features}},
                 common.seed,
                 {{"model", args.model},
                  {"alpha_max", io::FormatDouble(common.alpha_max)},
                  {"max_iterations", std::to_string(args.max_iterations)},
                  {"drop_multi_click", args.drop_multi_click ? "true" : "false"}},
                 {},
                 0.0},
                common, start);
  return 0;
}

int RunOptimize(const OptimizeArgs& args, const CommonFlags& common) {
  const auto start = Clock::now();
  const LoadedModel m = LoadModel(args.model_file, args.features);
  std::vector<double> prices;
  if (!args.prices.empty()) {
    prices = io::ReadPrices(args.prices);
  } else if (m.file.prices) {
    prices = *m.file.prices;
  } else {
    throw InvalidInput("no prices: pass --prices or use an instance file that contains them");
  }
  CheckPrices(prices, m.file.n);

  FptasConfig config;
  config.epsilon = common.epsilon;
  config.parallel_guesses = common.threads > 1;
  config.threads = common.threads;

  OptimizationResult result;
  if (args.method == "brute") {
    if (m.file.n > kBruteForceMaxProducts) {
      throw ResourceGuard("brute force is limited to n <= " +
                          std::to_string(kBruteForceMaxProducts) + " (n = " +
                          std::to_string(m.file.n) + "); use --method fptas");
    }
    if (m.gmnl) {
      result = brute_force_optimal(
          [&](const Assortment& s) { return gmnl_revenue(*m.gmnl, s, prices); }, m.file.n);
    } else {
      result = brute_force_optimal(
          [&](const Assortment& s) { return lowrank_revenue(*m.file.lowrank, s, prices); },
          m.file.n);
    }
  } else if (m.gmnl) {
    result = fptas_gmnl(*m.gmnl, prices, config);
  } else {
    result = fptas_lowrank(*m.file.lowrank, prices, config);
  }

  json j;
  j["assortment"] = AssortmentJson(result.assortment);
  j["revenue"] = result.revenue;
  j["method"] = ToString(result.method);
  j["guesses"] = result.guesses_evaluated;
  j["dp_states"] = result.dp_states;
  if (args.method == "fptas") j["epsilon"] = common.epsilon;
  if (m.file.target) {
    j["target"] = *m.file.target;
    j["target_met"] = result.revenue >= *m.file.target - 1e-9;
  }
  Emit(common, j.dump(2) + "\n");
  if (!common.out.empty()) {
    std::cout << "assortment " << io::FormatAssortment(result.assortment) << "\n"
              << "revenue " << io::FormatDouble(result.revenue) << "\n";
    if (m.file.target) std::cout << "target_met " << (j["target_met"].get<bool>() ? 1 : 0) << "\n";
  }
  WriteManifest({"optimize",
                 {{"model", args.model_file}, {"features", args.features}, {"prices", args.prices}},
                 std::nullopt,
                 {{"method", args.method}, {"epsilon", io::FormatDouble(common.epsilon)}},
                 {},
                 0.0},
                common, start);
  return 0;
}

int RunSimulate(const SimulateArgs& args, const CommonFlags& common) {
  const auto start = Clock::now();
  const std::string out = RequireOut(common, "simulate");
  if (args.t <= 0) throw InvalidInput("--T must be positive");
  const LoadedModel m = LoadModel(args.model_file, args.features);
  const MarkovChainModel chain = ChainOf(m);

  ChoiceDataset data(m.file.n, m.features, {});
  if (args.fixed_assortment) {
    const Assortment s = io::ParseAssortment(args.assortment);
    if (s.empty()) throw InvalidInput("--assortment must name at least one product");
    CheckAssortment(s, m.file.n);
    const WalkSampler sampler(chain, s);
    std::vector<Observation> obs(args.t);
    for (std::int64_t t = 0; t < args.t; ++t) {
      RandomStream rng(common.seed, static_cast<std::uint64_t>(t));
      obs[t] = {s, sampler.Sample(rng).chosen};
    }
    data = ChoiceDataset(m.file.n, m.features, std::move(obs));
  } else {
    const AssortmentSampler sampler = args.k > 0 ? AssortmentSampler::FixedSize(m.file.n, args.k)
                                                 : AssortmentSampler::UniformNonempty(m.file.n);
    data = generate_dataset(chain, m.features, sampler, args.t, common.seed, common.threads);
  }
  io::WriteAtomic(out, io::FormatDatasetCsv(data));
  std::cout << "observations " << data.size() << "\n";
  WriteManifest({"simulate",
                 {{"model", args.model_file}, {"features", args.features}},
                 common.seed,
                 {{"T", std::to_string(args.t)},
                  {"assortment", args.fixed_assortment ? args.assortment : ""},
                  {"k", std::to_string(args.k)}},
                 {},
                 0.0},
                common, start);
  return 0;
}

int RunFigure(const FigureArgs& args, const CommonFlags& common) {
  const auto start = Clock::now();
  std::ostringstream table;
  std::map<std::string, std::string> config{{"name", args.name}};
  std::map<std::string, std::string> inputs;
  std::optional<std::uint64_t> seed;

  if (args.name == "no-purchase") {
    const std::vector<double> alphas = ParseList(args.alphas.empty() ? "1,2,10" : args.alphas);
    const int n = args.n > 0 ? args.n : 15;
    const int kmax = args.kmax > 0 ? args.kmax : n;
    const NoPurchaseCurve curve = no_purchase_curve(n, alphas, kmax);
    table << "x";
    for (std::size_t a = 0; a < alphas.size(); ++a) table << " a" << a + 1;
    table << "\n";
    for (int k = 1; k <= kmax; ++k) {
      table << k;
      for (const auto& row : curve.values) table << ' ' << io::FormatDouble(row[k - 1]);
      table << "\n";
    }
    config["n"] = std::to_string(n);
    config["alphas"] = args.alphas;
  } else if (args.name == "star") {
    std::vector<double> alphas;
    if (args.alphas.empty()) {
      for (int a = 0; a <= 12; ++a) alphas.push_back(a);
    } else {
      alphas = ParseList(args.alphas);
    }
    const int n = args.n > 0 ? args.n : 10;
    table << "alpha revenue size hub_only assortment\n";
    for (const StarSweepRow& row : star_graph_sweep(n, args.p, args.big_p, alphas)) {
      table << io::FormatDouble(row.alpha) << ' ' << io::FormatDouble(row.result.revenue) << ' '
            << row.result.assortment.size() << ' ' << (row.hub_only ? 1 : 0) << ' '
            << io::FormatAssortment(row.result.assortment) << "\n";
    }
    config["n"] = std::to_string(n);
    config["p"] = io::FormatDouble(args.p);
    config["P"] = io::FormatDouble(args.big_p);
  } else if (args.name == "convergence") {
    std::optional<ChoiceDataset> data;
    if (!args.data.empty()) {
      if (args.features.empty()) throw InvalidInput("convergence with --data needs --features");
      data = io::ReadDatasetCsv(args.data, io::ReadFeaturesCsv(args.features));
      inputs = {{"data", args.data}, {"features", args.features}};
    } else {
      const int n = args.n > 0 ? args.n : 10;
      const Matrix x = SyntheticFeatures(n, args.d, common.seed);
      const GmnlParams truth{SyntheticBeta(x, args.alpha_true), args.alpha_true};
      data = generate_dataset(truth, x, AssortmentSampler::UniformNonempty(n), args.t,
                              common.seed, common.threads);
      seed = common.seed;
      config["T"] = std::to_string(args.t);
      config["alpha_true"] = io::FormatDouble(args.alpha_true);
      config["d"] = std::to_string(args.d);
      config["n"] = std::to_string(n);
    }
    EstimationOptions options;
    options.alpha_max = common.alpha_max;
    options.beta.seed = common.seed;
    options.beta.eval.threads = common.threads;
    const EstimationResult r = estimate_gmnl(*data, options);
    table << "iteration alpha loglik\n";
    for (const EstimationStep& step : r.trajectory) {
      table << step.iteration << ' ' << io::FormatDouble(step.alpha) << ' '
            << io::FormatDouble(step.log_likelihood) << "\n";
    }
  } else {
    throw InvalidInput("unknown figure '" + args.name + "' (expected no-purchase, star or convergence)");
  }
  Emit(common, table.str());
  WriteManifest({"figure " + args.name, inputs, seed, config, {}, 0.0}, common, start);
  return 0;
}

int RunEvaluate(const EvaluateArgs& args, const CommonFlags& common) {
  const auto start = Clock::now();
  const Matrix features = io::ReadFeaturesCsv(args.features);
  const ChoiceDataset holdout = io::ReadDatasetCsv(args.holdout, features);
  std::ostringstream report;
  report << "params model auc\n";
  std::map<std::string, std::string> inputs{{"holdout", args.holdout}, {"features", args.features}};
  for (std::size_t i = 0; i < args.params.size(); ++i) {
    const io::ModelFile file = io::ReadModelJson(args.params[i]);
    if (!file.params) throw InvalidInput(args.params[i] + ": evaluation needs beta parameters");
    if (file.params->beta.size() != features.cols()) {
      throw InvalidInput(args.params[i] + ": beta length does not match the features");
    }
    const double auc = holdout_auc(*file.params, holdout);
    report << args.params[i] << ' ' << file.kind << ' ' << io::FormatDouble(auc) << "\n";
    inputs["params" + std::to_string(i + 1)] = args.params[i];
  }
  Emit(common, report.str());
  WriteManifest({"evaluate", inputs, std::nullopt, {{"metric", "auc"}}, {}, 0.0}, common, start);
  return 0;
}

int RunGenInstance(const GenInstanceArgs& args, const CommonFlags& common) {
  const auto start = Clock::now();
  const std::string out = RequireOut(common, "gen-instance");
  std::vector<int> c;
  for (double x : ParseList(args.c)) {
    if (x != static_cast<int>(x)) throw InvalidInput("--c entries must be integers");
    c.push_back(static_cast<int>(x));
  }
  PartitionInstance inst = [&] {
    if (args.alpha <= 1.0) return build_partition_instance_small_alpha(c, args.alpha);
    if (args.alpha > 2.0) return build_partition_instance_large_alpha(c, args.alpha);
    throw InvalidInput("no reduction is available for 1 < alpha <= 2");
  }();
  io::WriteAtomic(out, io::FormatGmnlModelJson(inst.model, &inst.prices, &inst.target));
  std::cout << "n " << inst.model.n() << "\n"
            << "target " << io::FormatDouble(inst.target) << "\n";
  WriteManifest({"gen-instance", {}, std::nullopt,
                 {{"c", args.c}, {"alpha", io::FormatDouble(args.alpha)}}, {}, 0.0},
                common, start);
  return 0;
}

}  // namespace gmchoice::cli
