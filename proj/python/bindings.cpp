#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmchoice/assortment.hpp"
#include "gmchoice/errors.hpp"
#include "gmchoice/estimation.hpp"
#include "gmchoice/gmnl.hpp"
#include "gmchoice/lowrank.hpp"
#include "gmchoice/simulate.hpp"

namespace py = pybind11;
using namespace gmchoice;

namespace {

Assortment ToAssortment(const std::vector<int>& members) { return Assortment(members); }

std::vector<Observation> ToObservations(const std::vector<std::vector<int>>& offered,
                                        const std::vector<int>& choices) {
  if (offered.size() != choices.size()) throw InvalidInput("offered and choices differ in length");
  std::vector<Observation> out(offered.size());
  for (std::size_t t = 0; t < offered.size(); ++t) out[t] = {Assortment(offered[t]), choices[t]};
  return out;
}

py::dict ResultDict(const OptimizationResult& r) {
  py::dict d;
  d["assortment"] = r.assortment.members();
  d["revenue"] = r.revenue;
  d["method"] = ToString(r.method);
  d["guesses"] = r.guesses_evaluated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generalized Markov chain choice models";

  // Later registrations are tried first, so subclasses come after Error.
  auto base = py::register_exception<Error>(m, "GmchoiceError");
  py::register_exception<InvalidInput>(m, "InvalidInput", base);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base);
  py::register_exception<ResourceGuard>(m, "ResourceGuard", base);

  py::class_<MarkovChainModel>(m, "MarkovChainModel")
      .def(py::init<Vector, Matrix, double>(), py::arg("lam"), py::arg("rho"), py::arg("alpha"))
      .def_property_readonly("n", &MarkovChainModel::n)
      .def_property_readonly("alpha", &MarkovChainModel::alpha)
      .def_property_readonly("lam", &MarkovChainModel::lambda)
      .def_property_readonly("rho", &MarkovChainModel::rho);

  py::class_<GmnlModel>(m, "GmnlModel")
      .def(py::init<Vector, double>(), py::arg("v"), py::arg("alpha"))
      .def_property_readonly("n", &GmnlModel::n)
      .def_property_readonly("v", &GmnlModel::v)
      .def_property_readonly("alpha", &GmnlModel::alpha)
      .def("to_chain", &GmnlModel::ToChain);

  py::class_<LowRankModel>(m, "LowRankModel")
      .def(py::init<Matrix, Matrix, Vector, double>(), py::arg("u"), py::arg("v"), py::arg("lam"),
           py::arg("alpha"))
      .def_property_readonly("n", &LowRankModel::n)
      .def_property_readonly("rank", &LowRankModel::rank)
      .def("to_chain", &LowRankModel::ToChain);

  m.def("choice_probabilities",
        [](const MarkovChainModel& model, const std::vector<int>& s) {
          return Vector(choice_probabilities(model, ToAssortment(s)).pi);
        },
        py::arg("model"), py::arg("assortment"));
  m.def("expected_revenue",
        [](const MarkovChainModel& model, const std::vector<int>& s, const std::vector<double>& prices) {
          return expected_revenue(model, ToAssortment(s), prices);
        },
        py::arg("model"), py::arg("assortment"), py::arg("prices"));
  m.def("gmnl_choice_probabilities",
        [](const GmnlModel& model, const std::vector<int>& s) {
          return Vector(gmnl_choice_probabilities(model, ToAssortment(s)).pi);
        },
        py::arg("model"), py::arg("assortment"));
  m.def("gmnl_revenue",
        [](const GmnlModel& model, const std::vector<int>& s, const std::vector<double>& prices) {
          return gmnl_revenue(model, ToAssortment(s), prices);
        },
        py::arg("model"), py::arg("assortment"), py::arg("prices"));
  m.def("lowrank_revenue",
        [](const LowRankModel& model, const std::vector<int>& s, const std::vector<double>& prices) {
          return lowrank_revenue(model, ToAssortment(s), prices);
        },
        py::arg("model"), py::arg("assortment"), py::arg("prices"));

  m.def("brute_force_gmnl",
        [](const GmnlModel& model, const std::vector<double>& prices) {
          CheckPrices(prices, model.n());
          return ResultDict(brute_force_optimal(
              [&](const Assortment& s) { return gmnl_revenue(model, s, prices); }, model.n()));
        },
        py::arg("model"), py::arg("prices"));
  m.def("fptas_gmnl",
        [](const GmnlModel& model, const std::vector<double>& prices, double epsilon) {
          FptasConfig config;
          config.epsilon = epsilon;
          return ResultDict(fptas_gmnl(model, prices, config));
        },
        py::arg("model"), py::arg("prices"), py::arg("epsilon") = 0.1);
  m.def("fptas_lowrank",
        [](const LowRankModel& model, const std::vector<double>& prices, double epsilon) {
          FptasConfig config;
          config.epsilon = epsilon;
          return ResultDict(fptas_lowrank(model, prices, config));
        },
        py::arg("model"), py::arg("prices"), py::arg("epsilon") = 0.1);

  m.def("simulate_frequencies",
        [](const MarkovChainModel& model, const std::vector<int>& s, std::int64_t walks,
           std::uint64_t seed, int threads) {
          return simulate_frequencies(model, ToAssortment(s), walks, seed, threads);
        },
        py::arg("model"), py::arg("assortment"), py::arg("walks"), py::arg("seed"),
        py::arg("threads") = 1);
  m.def("no_purchase_curve",
        [](int n, const std::vector<double>& alphas, int kmax) {
          return no_purchase_curve(n, alphas, kmax).values;
        },
        py::arg("n"), py::arg("alphas"), py::arg("kmax"));
  m.def("synthetic_features", &SyntheticFeatures, py::arg("n"), py::arg("d"), py::arg("seed"));
  m.def("synthetic_beta", &SyntheticBeta, py::arg("features"), py::arg("alpha"));

  // Datasets cross the boundary as (offered, choices) lists.
  m.def("generate_dataset",
        [](const Vector& beta, double alpha, const Matrix& features, std::int64_t t,
           std::uint64_t seed) {
          const int n = static_cast<int>(features.rows()) - 1;
          const ChoiceDataset d = generate_dataset(GmnlParams{beta, alpha}, features,
                                                   AssortmentSampler::UniformNonempty(n), t, seed);
          std::vector<std::vector<int>> offered;
          std::vector<int> choices;
          for (const Observation& o : d.observations()) {
            offered.push_back(o.offered.members());
            choices.push_back(o.choice);
          }
          return py::make_tuple(offered, choices);
        },
        py::arg("beta"), py::arg("alpha"), py::arg("features"), py::arg("T"), py::arg("seed"));
  m.def("log_likelihood",
        [](const Matrix& features, const std::vector<std::vector<int>>& offered,
           const std::vector<int>& choices, const Vector& beta, double alpha) {
          const ChoiceDataset d(static_cast<int>(features.rows()) - 1, features,
                                ToObservations(offered, choices));
          return log_likelihood(d, GmnlParams{beta, alpha});
        },
        py::arg("features"), py::arg("offered"), py::arg("choices"), py::arg("beta"),
        py::arg("alpha"));
  m.def("estimate_gmnl",
        [](const Matrix& features, const std::vector<std::vector<int>>& offered,
           const std::vector<int>& choices, int max_iterations) {
          const ChoiceDataset d(static_cast<int>(features.rows()) - 1, features,
                                ToObservations(offered, choices));
          EstimationOptions options;
          options.max_iterations = max_iterations;
          const EstimationResult r = estimate_gmnl(d, options);
          py::dict out;
          out["beta"] = r.params.beta;
          out["alpha"] = r.params.alpha;
          out["log_likelihood"] = r.log_likelihood;
          out["iterations"] = r.iterations;
          std::vector<double> trajectory;
          for (const EstimationStep& step : r.trajectory) trajectory.push_back(step.alpha);
          out["alpha_trajectory"] = trajectory;
          return out;
        },
        py::arg("features"), py::arg("offered"), py::arg("choices"), py::arg("max_iterations") = 100);
  m.def("estimate_mnl",
        [](const Matrix& features, const std::vector<std::vector<int>>& offered,
           const std::vector<int>& choices) {
          const ChoiceDataset d(static_cast<int>(features.rows()) - 1, features,
                                ToObservations(offered, choices));
          return estimate_mnl(d);
        },
        py::arg("features"), py::arg("offered"), py::arg("choices"));
  m.def("roc_auc", [](const std::vector<double>& scores, const std::vector<int>& labels) {
    return roc_auc(scores, labels);
  }, py::arg("scores"), py::arg("labels"));
}
