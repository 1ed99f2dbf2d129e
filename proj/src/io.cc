//
// Copyright 2026 The PRAM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "pram/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace pram {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> ParseDouble(std::string_view s) {
  s = Trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return value;
}

// Splits one logical record; `line` may have been extended across physical
// lines by the caller when a quoted field spans them.
std::vector<std::string> SplitRecord(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

bool HasOpenQuote(const std::string& line) {
  bool open = false;
  for (char c : line) {
    if (c == '"') open = !open;
  }
  return open;
}

std::string QuoteField(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<double> NumericColumn(const CsvTable& table, std::size_t col,
                                  bool* ok) {
  std::vector<double> values;
  values.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const auto v = ParseDouble(row[col]);
    if (!v || !std::isfinite(*v)) {
      *ok = false;
      return {};
    }
    values.push_back(*v);
  }
  *ok = true;
  return values;
}

nlohmann::json VectorJson(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string RequireString(const nlohmann::json& config, const char* key) {
  if (!config.contains(key) || !config[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("estimand needs a string field '") + key + "'");
  }
  return config[key].get<std::string>();
}

}  // namespace

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::optional<std::size_t> CsvTable::FindColumn(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::ColumnIndex(std::string_view name) const {
  if (auto idx = FindColumn(name)) return *idx;
  throw Error(ErrorCode::kMissingColumn,
              "column '" + std::string(name) + "' not found");
}

void CsvTable::AppendColumn(std::string name, std::vector<std::string> values) {
  if (values.size() != rows.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "appended column length does not match the table");
  }
  if (FindColumn(name)) {
    throw Error(ErrorCode::kInvalidArgument,
                "column '" + name + "' already exists");
  }
  header.push_back(std::move(name));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].push_back(std::move(values[i]));
  }
}

CsvTable ParseCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    while (HasOpenQuote(line)) {
      std::string more;
      if (!std::getline(in, more)) {
        throw Error(ErrorCode::kInvalidArgument, "unterminated quoted field");
      }
      line += "\n" + more;
      ++line_number;
    }
    if (Trim(line).empty()) continue;
    std::vector<std::string> fields = SplitRecord(line);
    if (!have_header) {
      if (line_number == 1 && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        fields[0].erase(0, 3);
      }
      for (auto& f : fields) f = std::string(Trim(f));
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      std::ostringstream msg;
      msg << "line " << line_number << " has " << fields.size()
          << " fields, header has " << table.header.size();
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) {
    throw Error(ErrorCode::kInvalidArgument, "CSV input has no header row");
  }
  return table;
}

void WriteCsv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << QuoteField(row[i]);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

CsvTable ReadCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return ParseCsv(in);
}

void WriteCsvFile(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  WriteCsv(out, table);
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::vector<int> ParseLevels(const CsvTable& table, std::string_view column,
                             int levels) {
  const std::size_t col = table.ColumnIndex(column);
  std::vector<int> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string_view field = Trim(table.rows[i][col]);
    int value = -1;
    const auto [end, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size() || value < 0 ||
        value >= levels) {
      std::ostringstream msg;
      msg << "column '" << column << "' row " << i + 1 << ": '" << field
          << "' is not a level in 0.." << levels - 1;
      throw Error(ErrorCode::kLevelOutOfRange, msg.str());
    }
    out.push_back(value);
  }
  return out;
}

Recoding RecodeLevels(const CsvTable& table, std::string_view column) {
  const std::size_t col = table.ColumnIndex(column);
  std::set<std::string> distinct;
  for (const auto& row : table.rows) distinct.insert(std::string(Trim(row[col])));
  Recoding recoding;
  int next = 0;
  for (const auto& value : distinct) recoding.mapping[value] = next++;
  recoding.codes.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    recoding.codes.push_back(recoding.mapping.at(std::string(Trim(row[col]))));
  }
  return recoding;
}

Dataset DatasetFromCsv(const CsvTable& table, const std::string& sensitive,
                       int levels,
                       const std::optional<std::string>& perturbed_column,
                       const std::optional<std::string>& original_column) {
  Dataset data(sensitive, levels);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    if (name == sensitive || (perturbed_column && name == *perturbed_column) ||
        (original_column && name == *original_column)) {
      continue;
    }
    bool ok = false;
    std::vector<double> values = NumericColumn(table, c, &ok);
    if (ok) data.AddColumn(name, std::move(values));
  }
  if (perturbed_column) {
    data.SetSensitive(SensitiveTag::kPerturbed,
                      ParseLevels(table, *perturbed_column, levels));
  }
  if (original_column) {
    data.SetSensitive(SensitiveTag::kOriginal,
                      ParseLevels(table, *original_column, levels));
  }
  return data;
}

Eigen::MatrixXd ParseMatrixCsv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& field : SplitRecord(line)) {
      const auto v = ParseDouble(field);
      if (!v) {
        throw Error(ErrorCode::kInvalidArgument,
                    "matrix entry '" + field + "' is not a number");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "empty matrix");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw Error(ErrorCode::kInvalidArgument, "matrix rows differ in length");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd ReadMatrixCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return ParseMatrixCsv(in);
}

EstimandSpec ParseEstimandSpec(const nlohmann::json& config) {
  if (!config.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "estimand must be a JSON object");
  }
  if (config.contains("schema") &&
      !(config["schema"].is_number_integer() && config["schema"] == 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported estimand schema version");
  }
  EstimandSpec spec;
  const std::string kind = RequireString(config, "kind");
  const auto parsed = ParseEstimandKind(kind);
  if (!parsed || *parsed == EstimandKind::kCustom) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown estimand kind '" + kind + "'");
  }
  spec.kind = *parsed;
  spec.sensitive_column = RequireString(config, "sensitive_column");
  spec.response = config.contains("response")
                      ? RequireString(config, "response")
                      : spec.sensitive_column;
  if (config.contains("covariates")) {
    if (!config["covariates"].is_array()) {
      throw Error(ErrorCode::kInvalidArgument, "covariates must be an array");
    }
    for (const auto& c : config["covariates"]) {
      if (!c.is_string()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "covariate names must be strings");
      }
      spec.covariates.push_back(c.get<std::string>());
    }
  }
  if (config.contains("intercept")) {
    if (!config["intercept"].is_boolean()) {
      throw Error(ErrorCode::kInvalidArgument, "intercept must be a boolean");
    }
    spec.intercept = config["intercept"].get<bool>();
  }
  if (config.contains("sensitive_role")) {
    const std::string role = RequireString(config, "sensitive_role");
    if (role == "response") {
      spec.sensitive_role = SensitiveRole::kResponse;
    } else if (role == "covariate") {
      spec.sensitive_role = SensitiveRole::kCovariate;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "sensitive_role must be 'response' or 'covariate'");
    }
  }
  if (config.contains("levels")) {
    if (!config["levels"].is_number_integer()) {
      throw Error(ErrorCode::kInvalidArgument, "levels must be an integer");
    }
    spec.levels = config["levels"].get<int>();
  }
  return spec;
}

EstimandSpec LoadEstimandSpec(const std::string& text) {
  std::string body = text;
  if (Trim(text).empty() || Trim(text).front() != '{') {
    std::ifstream in(text);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + text + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    body = buffer.str();
  }
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("estimand is not valid JSON: ") + e.what());
  }
  return ParseEstimandSpec(config);
}

nlohmann::json ResultToJson(const EstimateResult& result) {
  nlohmann::json out;
  out["method"] = std::string(MethodName(result.method));
  out["beta_hat"] = VectorJson(result.beta_hat);
  if (result.covariance) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < result.covariance->rows(); ++i) {
      cov.push_back(VectorJson(result.covariance->row(i).transpose()));
    }
    out["covariance"] = cov;
    out["std_errors"] = VectorJson(result.std_errors);
    out["ci"] = {{"level", result.ci_level},
                 {"lower", VectorJson(result.ci_lower)},
                 {"upper", VectorJson(result.ci_upper)}};
  } else {
    out["covariance"] = nullptr;
    out["std_errors"] = nullptr;
    out["ci"] = nullptr;
  }
  out["diagnostics"] = {
      {"iterations", result.diagnostics.iterations},
      {"residual_norm", result.diagnostics.residual_norm},
      {"converged", result.diagnostics.converged},
      {"jacobian_condition", result.diagnostics.jacobian_condition}};
  return out;
}

}  // namespace pram
