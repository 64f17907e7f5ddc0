#include "gmchoice/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "gmchoice/errors.hpp"

namespace gmchoice::io {
namespace {

using nlohmann::json;

std::vector<std::string> Split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw InvalidInput("line " + std::to_string(line) + ": " + what);
}

long long ParseInt(const std::string& raw, std::size_t line, const char* what) {
  const std::string s = Trim(raw);
  long long value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    Fail(line, std::string("cannot parse ") + what + " '" + s + "' as an integer");
  }
  return value;
}

double ParseReal(const std::string& raw, std::size_t line, const char* what) {
  const std::string s = Trim(raw);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(value)) {
    Fail(line, std::string("cannot parse ") + what + " '" + s + "' as a finite number");
  }
  return value;
}

// Lines of a CSV body, skipping blank lines but keeping 1-based numbers.
std::vector<std::pair<std::size_t, std::string>> Lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    out.emplace_back(number, line);
  }
  return out;
}

std::vector<double> DoubleArray(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw InvalidInput(std::string("model file needs an array '") + key + "'");
  }
  std::vector<double> out;
  for (const json& x : j.at(key)) {
    if (!x.is_number()) throw InvalidInput(std::string("'") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix MatrixField(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
    throw InvalidInput(std::string("model file needs a nonempty matrix '") + key + "'");
  }
  const json& rows = j.at(key);
  const std::size_t cols = rows.at(0).size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) {
      throw InvalidInput(std::string("matrix '") + key + "' is ragged");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

Vector ToVector(const std::vector<double>& x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorJson(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

Matrix ParseFeaturesCsv(const std::string& text) {
  const auto lines = Lines(text);
  if (lines.empty()) throw InvalidInput("features file is empty");
  const auto header = Split(lines[0].second, ',');
  if (header.size() < 2 || Trim(header[0]) != "id") {
    Fail(lines[0].first, "features header must be 'id,f1,...,fd'");
  }
  const std::size_t d = header.size() - 1;
  std::map<long long, std::vector<double>> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, line] = lines[r];
    const auto fields = Split(line, ',');
    if (fields.size() != d + 1) {
      Fail(number, "expected " + std::to_string(d + 1) + " fields, found " +
                       std::to_string(fields.size()));
    }
    const long long id = ParseInt(fields[0], number, "id");
    if (id < 0) Fail(number, "negative id");
    std::vector<double> values;
    for (std::size_t c = 1; c <= d; ++c) values.push_back(ParseReal(fields[c], number, "feature"));
    if (!rows.emplace(id, std::move(values)).second) {
      Fail(number, "duplicate id " + std::to_string(id));
    }
  }
  if (rows.empty() || rows.begin()->first != 0) {
    throw InvalidInput("features file must include id 0 (the no-purchase option)");
  }
  if (rows.rbegin()->first != static_cast<long long>(rows.size()) - 1) {
    throw InvalidInput("feature ids must be exactly 0..n without gaps");
  }
  Matrix m(rows.size(), d);
  for (const auto& [id, values] : rows) {
    for (std::size_t c = 0; c < d; ++c) m(id, c) = values[c];
  }
  return m;
}

Matrix ReadFeaturesCsv(const std::filesystem::path& path) { return ParseFeaturesCsv(ReadText(path)); }

std::string FormatFeaturesCsv(const Matrix& features) {
  std::ostringstream out;
  out << "id";
  for (Eigen::Index c = 0; c < features.cols(); ++c) out << ",f" << c + 1;
  out << '\n';
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < features.cols(); ++c) out << ',' << FormatDouble(features(r, c));
    out << '\n';
  }
  return out.str();
}

Assortment ParseAssortment(const std::string& text) {
  std::vector<int> ids;
  const std::string trimmed = Trim(text);
  if (trimmed.empty()) return Assortment();
  for (const std::string& field : Split(trimmed, ';')) {
    const long long id = ParseInt(field, 0, "product id");
    if (id < 1 || id > std::numeric_limits<int>::max()) {
      throw InvalidInput("product id " + std::to_string(id) + " must be positive");
    }
    ids.push_back(static_cast<int>(id));
  }
  return Assortment(std::move(ids));
}

std::string FormatAssortment(const Assortment& s) {
  std::string out;
  for (int i : s) {
    if (!out.empty()) out += ';';
    out += std::to_string(i);
  }
  return out;
}

ChoiceDataset ParseDatasetCsv(const std::string& text, const Matrix& features,
                              const IngestOptions& options, IngestReport* report) {
  const int n = static_cast<int>(features.rows()) - 1;
  const auto lines = Lines(text);
  if (lines.empty()) throw InvalidInput("dataset file is empty");
  const auto header = Split(lines[0].second, ',');
  if (header.size() != 3 || Trim(header[0]) != "t" || Trim(header[1]) != "assortment" ||
      Trim(header[2]) != "choice") {
    Fail(lines[0].first, "dataset header must be 't,assortment,choice'");
  }
  IngestReport local;
  std::vector<Observation> obs;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, line] = lines[r];
    ++local.rows;
    const auto fields = Split(line, ',');
    if (fields.size() != 3) {
      Fail(number, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    ParseInt(fields[0], number, "t");
    Observation o;
    try {
      o.offered = ParseAssortment(fields[1]);
    } catch (const InvalidInput& e) {
      Fail(number, e.what());
    }
    if (o.offered.empty()) Fail(number, "empty assortment");
    if (o.offered.max_member() > n) {
      Fail(number, "product " + std::to_string(o.offered.max_member()) +
                       " has no feature row (n = " + std::to_string(n) + ")");
    }
    const auto choices = Split(Trim(fields[2]), ';');
    if (choices.size() > 1) {
      if (options.drop_multi_click) {
        ++local.dropped_multi_click;
        continue;
      }
      Fail(number, "several choices recorded; enable multi-click dropping to skip such rows");
    }
    const long long choice = ParseInt(fields[2], number, "choice");
    if (choice < 0 || (choice > 0 && !o.offered.contains(static_cast<int>(choice)))) {
      Fail(number, "choice " + std::to_string(choice) + " is not in the offered assortment");
    }
    o.choice = static_cast<int>(choice);
    obs.push_back(std::move(o));
  }
  if (report) *report = local;
  return ChoiceDataset(n, features, std::move(obs));
}

ChoiceDataset ReadDatasetCsv(const std::filesystem::path& path, const Matrix& features,
                             const IngestOptions& options, IngestReport* report) {
  try {
    return ParseDatasetCsv(ReadText(path), features, options, report);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string FormatDatasetCsv(const ChoiceDataset& data) {
  std::string out = "t,assortment,choice\n";
  std::size_t t = 0;
  for (const Observation& o : data.observations()) {
    out += std::to_string(t++);
    out += ',';
    out += FormatAssortment(o.offered);
    out += ',';
    out += std::to_string(o.choice);
    out += '\n';
  }
  return out;
}

ModelFile ParseModelJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("model") || !j.at("model").is_string()) {
    throw InvalidInput("model file must be an object with a string field 'model'");
  }
  ModelFile file;
  try {
    file.kind = j.at("model").get<std::string>();
    file.n = j.value("n", 0);
    file.d = j.value("d", 0);
    const double alpha = file.kind == "mnl" ? 0.0 : j.value("alpha", 0.0);
    if (file.kind == "mnl" || file.kind == "gmnl") {
      if (j.contains("beta")) {
        file.params = GmnlParams{ToVector(DoubleArray(j, "beta")), alpha};
        if (file.d == 0) file.d = static_cast<int>(file.params->beta.size());
        if (file.d != file.params->beta.size()) throw InvalidInput("'d' disagrees with 'beta'");
        if (file.kind == "mnl" && j.value("alpha", 0.0) != 0.0) {
          throw InvalidInput("an mnl model has alpha = 0");
        }
      } else if (j.contains("v")) {
        file.gmnl = GmnlModel(ToVector(DoubleArray(j, "v")), alpha);
        if (file.n == 0) file.n = file.gmnl->n();
        if (file.n != file.gmnl->n()) throw InvalidInput("'n' disagrees with 'v'");
      } else {
        throw InvalidInput("gmnl/mnl model file needs 'beta' or 'v'");
      }
    } else if (file.kind == "lowrank") {
      file.lowrank = LowRankModel(MatrixField(j, "U"), MatrixField(j, "V"),
                                  ToVector(DoubleArray(j, "lambda")), alpha);
      if (file.n == 0) file.n = file.lowrank->n();
      if (file.n != file.lowrank->n()) throw InvalidInput("'n' disagrees with 'U'");
    } else {
      throw InvalidInput("unknown model kind '" + file.kind + "'");
    }
    if (j.contains("prices")) file.prices = DoubleArray(j, "prices");
    if (j.contains("target")) file.target = j.at("target").get<double>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("invalid model file: ") + e.what());
  }
  return file;
}

ModelFile ReadModelJson(const std::filesystem::path& path) {
  try {
    return ParseModelJson(ReadText(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string FormatParamsJson(const std::string& kind, int n, const GmnlParams& params) {
  json j;
  j["model"] = kind;
  j["n"] = n;
  j["d"] = params.beta.size();
  j["beta"] = VectorJson(params.beta);
  j["alpha"] = params.alpha;
  return j.dump(2) + "\n";
}

std::string FormatGmnlModelJson(const GmnlModel& model, const std::vector<double>* prices,
                                const double* target) {
  json j;
  j["model"] = "gmnl";
  j["n"] = model.n();
  j["v"] = VectorJson(model.v());
  j["alpha"] = model.alpha();
  if (prices) j["prices"] = *prices;
  if (target) j["target"] = *target;
  return j.dump(2) + "\n";
}

std::string FormatLowRankJson(const LowRankModel& model) {
  json j;
  j["model"] = "lowrank";
  j["n"] = model.n();
  j["K"] = model.rank();
  j["U"] = MatrixJson(model.u());
  j["V"] = MatrixJson(model.v());
  j["lambda"] = VectorJson(model.lambda());
  j["alpha"] = model.alpha();
  return j.dump(2) + "\n";
}

std::vector<double> ParsePricesJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("malformed prices JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("prices")) return DoubleArray(j, "prices");
  if (!j.is_array()) throw InvalidInput("prices file must be a JSON array or {\"prices\": [...]}");
  std::vector<double> out;
  for (const json& x : j) {
    if (!x.is_number()) throw InvalidInput("prices must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<double> ReadPrices(const std::filesystem::path& path) {
  return ParsePricesJson(ReadText(path));
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteAtomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidInput("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InvalidInput("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string FormatDouble(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

std::string RunManifest::ToJson() const {
  json j;
  j["command"] = command;
  j["inputs"] = inputs;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["config"] = config;
  j["outputs"] = outputs;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j.dump(2) + "\n";
}

std::filesystem::path ManifestPath(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace gmchoice::io
