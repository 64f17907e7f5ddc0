#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmchoice/estimation.hpp"
#include "gmchoice/gmnl.hpp"
#include "gmchoice/lowrank.hpp"

namespace gmchoice::io {

// Features CSV: header `id,f1,...,fd`, one row per state id 0..n in any order.
Matrix ParseFeaturesCsv(const std::string& text);
Matrix ReadFeaturesCsv(const std::filesystem::path& path);
std::string FormatFeaturesCsv(const Matrix& features);

struct IngestOptions {
  // Rows whose choice column lists several clicked products ("3;7") are
  // dropped instead of rejected.
  bool drop_multi_click = false;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t dropped_multi_click = 0;
};

// Dataset CSV: header `t,assortment,choice`; assortment is a semicolon
// separated list of 1-based product ids and choice 0 means no purchase.
ChoiceDataset ParseDatasetCsv(const std::string& text, const Matrix& features,
                              const IngestOptions& options = {}, IngestReport* report = nullptr);
ChoiceDataset ReadDatasetCsv(const std::filesystem::path& path, const Matrix& features,
                             const IngestOptions& options = {}, IngestReport* report = nullptr);
std::string FormatDatasetCsv(const ChoiceDataset& data);

// Parses "1;3;4" (empty string -> empty assortment).
Assortment ParseAssortment(const std::string& text);
std::string FormatAssortment(const Assortment& s);

// Any of the model files understood by the command-line tool.
struct ModelFile {
  std::string kind;  // "mnl", "gmnl" or "lowrank"
  int n = 0;
  int d = 0;
  // Feature-based parameters ("mnl"/"gmnl" with "beta").
  std::optional<GmnlParams> params;
  // Explicit attraction vector over 0..n ("gmnl" with "v").
  std::optional<GmnlModel> gmnl;
  std::optional<LowRankModel> lowrank;
  std::optional<std::vector<double>> prices;
  std::optional<double> target;
};

ModelFile ParseModelJson(const std::string& text);
ModelFile ReadModelJson(const std::filesystem::path& path);

std::string FormatParamsJson(const std::string& kind, int n, const GmnlParams& params);
std::string FormatGmnlModelJson(const GmnlModel& model, const std::vector<double>* prices,
                                const double* target);
std::string FormatLowRankJson(const LowRankModel& model);

std::vector<double> ParsePricesJson(const std::string& text);
std::vector<double> ReadPrices(const std::filesystem::path& path);

std::string ReadText(const std::filesystem::path& path);
// Writes through a temporary file in the same directory and renames it over
// the destination.
void WriteAtomic(const std::filesystem::path& path, const std::string& content);

// Fixed 17-significant-digit rendering used for every text output.
std::string FormatDouble(double x);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> config;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  std::string ToJson() const;
};

// Manifest path for an output file: "<out>.manifest.json".
std::filesystem::path ManifestPath(const std::filesystem::path& output);

}  // namespace gmchoice::io
