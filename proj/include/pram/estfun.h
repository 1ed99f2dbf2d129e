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

// Built-in estimating functions.
//
// An estimand names a response and an ordered list of covariates. Any of
// those names that equals `sensitive_column` is not read from the data; it
// takes the hypothetical level the function is evaluated at. Every other
// name must be a numeric column of the dataset the function is built
// against. Built functions can be reused on any dataset with the same column
// layout.

#ifndef PRAM_ESTFUN_H_
#define PRAM_ESTFUN_H_

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pram/core.h"

namespace pram {

enum class EstimandKind { kMean, kLogistic, kLinear, kCustom };
enum class SensitiveRole { kResponse, kCovariate };

std::string_view EstimandKindName(EstimandKind kind);
std::optional<EstimandKind> ParseEstimandKind(std::string_view name);

struct EstimandSpec {
  EstimandKind kind = EstimandKind::kMean;
  std::string response;
  std::vector<std::string> covariates;
  bool intercept = true;
  SensitiveRole sensitive_role = SensitiveRole::kResponse;
  std::string sensitive_column;
  int levels = 2;

  // 1 for the mean, covariates (+ intercept) for regressions.
  int dim() const;
};

// 1 / (1 + exp(-v)) without overflow for large |v|.
double Expit(double v);

// U = y - beta.
EstimatingFunction BuildMean(const EstimandSpec& spec, const Dataset& schema);

// U = (y - expit(beta' x)) x with analytic Jacobian -expit(1-expit) x x'.
// Throws kNonBinaryResponse unless the response takes values in {0, 1}.
EstimatingFunction BuildLogistic(const EstimandSpec& spec,
                                 const Dataset& schema);

// U = (y - beta' x) x with Jacobian -x x'.
EstimatingFunction BuildLinear(const EstimandSpec& spec, const Dataset& schema);

// Dispatches on spec.kind; kCustom is rejected here.
EstimatingFunction BuildEstimatingFunction(const EstimandSpec& spec,
                                           const Dataset& schema);

using LevelFunction =
    std::function<Eigen::VectorXd(const Record&, std::span<const double>)>;

// One function per level 0..levels-1. Throws kMissingLevel when a level is
// absent; evaluation throws kDimensionMismatch when a function returns a
// vector whose size is not `dim`. No analytic Jacobian.
EstimatingFunction BuildCustom(int levels, int dim,
                               const std::map<int, LevelFunction>& table);

}  // namespace pram

#endif  // PRAM_ESTFUN_H_
