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

// CSV and JSON input/output.
//
// CSV files are comma separated with a required header row. Fields are kept
// as raw strings so that a file can be written back unchanged apart from
// appended columns. Quoted fields are supported for reading; fields that
// contain commas or quotes are quoted on output.
//
// Transition matrices are stored as K rows of K numbers with no header.
// Row i, column j holds Pr(S* = i | S = j), so every column sums to one.

#ifndef PRAM_IO_H_
#define PRAM_IO_H_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "pram/core.h"
#include "pram/estfun.h"

namespace pram {

// Shortest decimal string that round-trips; "NA" for NaN, "inf"/"-inf" for
// infinities.
std::string FormatDouble(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> FindColumn(std::string_view name) const;
  // Throws kMissingColumn.
  std::size_t ColumnIndex(std::string_view name) const;
  void AppendColumn(std::string name, std::vector<std::string> values);
};

// Throws kInvalidArgument on ragged rows or an empty header.
CsvTable ParseCsv(std::istream& in);
void WriteCsv(std::ostream& out, const CsvTable& table);
// File variants throw kIo when the file cannot be opened.
CsvTable ReadCsvFile(const std::string& path);
void WriteCsvFile(const std::string& path, const CsvTable& table);

// Integer levels 0..levels-1. Throws kLevelOutOfRange for anything else.
std::vector<int> ParseLevels(const CsvTable& table, std::string_view column,
                             int levels);

// Maps the distinct strings of a column, in sorted order, to 0, 1, ...
struct Recoding {
  std::vector<int> codes;
  std::map<std::string, int> mapping;
};
Recoding RecodeLevels(const CsvTable& table, std::string_view column);

// Builds a dataset whose sensitive variable is `sensitive`. Every other
// column that parses as finite numbers becomes a numeric column.
// `perturbed_column` and `original_column` name the CSV columns holding the
// perturbed and original levels; either may be absent.
Dataset DatasetFromCsv(const CsvTable& table, const std::string& sensitive,
                       int levels,
                       const std::optional<std::string>& perturbed_column,
                       const std::optional<std::string>& original_column);

// Throws kIo or kInvalidArgument; the result is not validated.
Eigen::MatrixXd ParseMatrixCsv(std::istream& in);
Eigen::MatrixXd ReadMatrixCsvFile(const std::string& path);

// Estimand configuration, e.g.
//   {"schema": 1, "kind": "logistic", "response": "y_pram",
//    "covariates": ["x"], "sensitive_role": "response",
//    "sensitive_column": "y_pram", "levels": 2}
// "schema" may be omitted; any value other than 1 is rejected.
EstimandSpec ParseEstimandSpec(const nlohmann::json& config);
// `text` is inline JSON when it starts with '{', a file path otherwise.
EstimandSpec LoadEstimandSpec(const std::string& text);

nlohmann::json ResultToJson(const EstimateResult& result);

}  // namespace pram

#endif  // PRAM_IO_H_
