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

#include "pram/estfun.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

namespace pram {
namespace {

// Where one design entry comes from.
struct Term {
  enum class Source { kOne, kLevel, kColumn };
  Source source;
  std::size_t column = 0;

  double Get(const Record& record, int level) const {
    switch (source) {
      case Source::kOne: return 1.0;
      case Source::kLevel: return static_cast<double>(level);
      case Source::kColumn: return record[column];
    }
    return 0.0;
  }
};

Term Resolve(const EstimandSpec& spec, const Dataset& schema,
             const std::string& name) {
  if (name == spec.sensitive_column) return {Term::Source::kLevel};
  return {Term::Source::kColumn, schema.ColumnIndex(name)};
}

void CheckRole(const EstimandSpec& spec) {
  if (spec.sensitive_column.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "estimand must name its sensitive column");
  }
  if (spec.levels < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "sensitive variable needs at least 2 levels");
  }
  const bool in_covariates =
      std::find(spec.covariates.begin(), spec.covariates.end(),
                spec.sensitive_column) != spec.covariates.end();
  if (spec.sensitive_role == SensitiveRole::kResponse &&
      spec.response != spec.sensitive_column) {
    throw Error(ErrorCode::kInvalidArgument,
                "sensitive_role is response but the response is '" +
                    spec.response + "', not '" + spec.sensitive_column + "'");
  }
  if (spec.sensitive_role == SensitiveRole::kCovariate && !in_covariates) {
    throw Error(ErrorCode::kInvalidArgument,
                "sensitive_role is covariate but '" + spec.sensitive_column +
                    "' is not among the covariates");
  }
}

struct Design {
  Term response;
  std::vector<Term> terms;
};

Design ResolveDesign(const EstimandSpec& spec, const Dataset& schema) {
  CheckRole(spec);
  Design design{Resolve(spec, schema, spec.response), {}};
  if (spec.intercept) design.terms.push_back({Term::Source::kOne});
  for (const auto& name : spec.covariates) {
    design.terms.push_back(Resolve(spec, schema, name));
  }
  if (design.terms.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "regression estimand has no design columns");
  }
  return design;
}

}  // namespace

std::string_view EstimandKindName(EstimandKind kind) {
  switch (kind) {
    case EstimandKind::kMean: return "mean";
    case EstimandKind::kLogistic: return "logistic";
    case EstimandKind::kLinear: return "linear";
    case EstimandKind::kCustom: return "custom";
  }
  return "unknown";
}

std::optional<EstimandKind> ParseEstimandKind(std::string_view name) {
  for (EstimandKind k : {EstimandKind::kMean, EstimandKind::kLogistic,
                         EstimandKind::kLinear, EstimandKind::kCustom}) {
    if (EstimandKindName(k) == name) return k;
  }
  return std::nullopt;
}

int EstimandSpec::dim() const {
  if (kind == EstimandKind::kMean) return 1;
  return static_cast<int>(covariates.size()) + (intercept ? 1 : 0);
}

double Expit(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

EstimatingFunction BuildMean(const EstimandSpec& spec, const Dataset& schema) {
  CheckRole(spec);
  const Term y = Resolve(spec, schema, spec.response);
  return EstimatingFunction(
      1, spec.levels,
      [y](const Record& r, int level, std::span<const double> beta,
          std::span<double> out) { out[0] = y.Get(r, level) - beta[0]; },
      [](const Record&, int, std::span<const double>, std::span<double> out) {
        out[0] = -1.0;
      });
}

EstimatingFunction BuildLogistic(const EstimandSpec& spec,
                                 const Dataset& schema) {
  Design design = ResolveDesign(spec, schema);
  if (design.response.source == Term::Source::kLevel) {
    if (spec.levels != 2) {
      std::ostringstream msg;
      msg << "logistic response '" << spec.response << "' has " << spec.levels
          << " levels, expected 2";
      throw Error(ErrorCode::kNonBinaryResponse, msg.str());
    }
  } else {
    for (double v : schema.column(design.response.column)) {
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::kNonBinaryResponse,
                    "logistic response '" + spec.response +
                        "' has values other than 0 and 1");
      }
    }
  }
  const int d = static_cast<int>(design.terms.size());
  auto shared = std::make_shared<const Design>(std::move(design));
  auto linear_predictor = [shared](const Record& r, int level,
                                   std::span<const double> beta) {
    double eta = 0.0;
    for (std::size_t j = 0; j < shared->terms.size(); ++j) {
      eta += beta[j] * shared->terms[j].Get(r, level);
    }
    return eta;
  };
  return EstimatingFunction(
      d, spec.levels,
      [shared, linear_predictor](const Record& r, int level,
                                 std::span<const double> beta,
                                 std::span<double> out) {
        const double residual =
            shared->response.Get(r, level) - Expit(linear_predictor(r, level, beta));
        for (std::size_t j = 0; j < shared->terms.size(); ++j) {
          out[j] = residual * shared->terms[j].Get(r, level);
        }
      },
      [shared, linear_predictor, d](const Record& r, int level,
                                    std::span<const double> beta,
                                    std::span<double> out) {
        const double m = Expit(linear_predictor(r, level, beta));
        const double w = -m * (1.0 - m);
        for (int a = 0; a < d; ++a) {
          const double xa = shared->terms[a].Get(r, level);
          for (int b = 0; b < d; ++b) {
            out[a * d + b] = w * xa * shared->terms[b].Get(r, level);
          }
        }
      });
}

EstimatingFunction BuildLinear(const EstimandSpec& spec,
                               const Dataset& schema) {
  auto shared =
      std::make_shared<const Design>(ResolveDesign(spec, schema));
  const int d = static_cast<int>(shared->terms.size());
  return EstimatingFunction(
      d, spec.levels,
      [shared](const Record& r, int level, std::span<const double> beta,
               std::span<double> out) {
        double fitted = 0.0;
        for (std::size_t j = 0; j < shared->terms.size(); ++j) {
          fitted += beta[j] * shared->terms[j].Get(r, level);
        }
        const double residual = shared->response.Get(r, level) - fitted;
        for (std::size_t j = 0; j < shared->terms.size(); ++j) {
          out[j] = residual * shared->terms[j].Get(r, level);
        }
      },
      [shared, d](const Record& r, int level, std::span<const double>,
                  std::span<double> out) {
        for (int a = 0; a < d; ++a) {
          const double xa = shared->terms[a].Get(r, level);
          for (int b = 0; b < d; ++b) {
            out[a * d + b] = -xa * shared->terms[b].Get(r, level);
          }
        }
      });
}

EstimatingFunction BuildEstimatingFunction(const EstimandSpec& spec,
                                           const Dataset& schema) {
  switch (spec.kind) {
    case EstimandKind::kMean: return BuildMean(spec, schema);
    case EstimandKind::kLogistic: return BuildLogistic(spec, schema);
    case EstimandKind::kLinear: return BuildLinear(spec, schema);
    case EstimandKind::kCustom: break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "custom estimands are built with BuildCustom");
}

EstimatingFunction BuildCustom(int levels, int dim,
                               const std::map<int, LevelFunction>& table) {
  auto functions = std::make_shared<std::vector<LevelFunction>>(levels);
  for (int level = 0; level < levels; ++level) {
    auto it = table.find(level);
    if (it == table.end() || !it->second) {
      std::ostringstream msg;
      msg << "custom estimating function has no entry for level " << level;
      throw Error(ErrorCode::kMissingLevel, msg.str());
    }
    (*functions)[level] = it->second;
  }
  if (table.size() != static_cast<std::size_t>(levels)) {
    throw Error(ErrorCode::kInvalidArgument,
                "custom table has entries outside 0..K-1");
  }
  return EstimatingFunction(
      dim, levels,
      [functions, dim](const Record& r, int level, std::span<const double> beta,
                       std::span<double> out) {
        Eigen::VectorXd value = (*functions)[level](r, beta);
        if (value.size() != dim) {
          std::ostringstream msg;
          msg << "custom function for level " << level << " returned "
              << value.size() << " values, expected " << dim;
          throw Error(ErrorCode::kDimensionMismatch, msg.str());
        }
        std::copy(value.data(), value.data() + dim, out.begin());
      });
}

}  // namespace pram
