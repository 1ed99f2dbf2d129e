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

// Monte Carlo simulation studies.
//
// Two data-generating designs are built in:
//
//   response   X ~ Normal(mu, sigma), Y | X ~ Bernoulli(expit(b0 + b1 X)).
//              Y is perturbed; the estimand is the logistic regression of Y
//              on X.
//   covariate  X ~ Bernoulli(pi), Y | X ~ Normal(b0 + b1 X, 1). X is
//              perturbed; the estimand is the linear regression of Y on X.
//
// Scenario ids fix the design and the grid of cells: A1 and B1 sweep n over
// 1000..2000 for p00 = p11 in {0.75, 0.85, 0.95}; A2 and B2 fix n = 1000 and
// sweep (p00, p11) over a grid on [0.75, 0.95].
//
// Replicate r of cell c draws from substream (seed, c, r), so results do not
// depend on the thread count.

#ifndef PRAM_SIMLAB_H_
#define PRAM_SIMLAB_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "pram/core.h"
#include "pram/estfun.h"
#include "pram/model_dependent.h"

namespace pram {

enum class ScenarioId { kA1, kA2, kB1, kB2, kCustom };
enum class Design { kResponse, kCovariate };
enum class SeMode { kNone, kResample, kPlugin };

std::string_view ScenarioIdName(ScenarioId id);
std::optional<ScenarioId> ParseScenarioId(std::string_view name);
std::string_view SeModeName(SeMode mode);
std::optional<SeMode> ParseSeMode(std::string_view name);

struct Cell {
  int n = 1000;
  double p00 = 0.85;
  double p11 = 0.85;
};

struct ScenarioConfig {
  ScenarioId id = ScenarioId::kA1;
  Design design = Design::kResponse;
  // (b0, b1).
  Eigen::Vector2d beta_true = Eigen::Vector2d(-1.0, 1.5);
  double x_mean = 0.5;
  double x_sd = 1.0;
  double x_probability = 0.5;
  double noise_sd = 1.0;

  std::vector<Cell> cells;
  int replicates = 500;
  std::uint64_t seed = 0;
  std::vector<Method> methods = {Method::kProposed};
  SeMode se_mode = SeMode::kResample;
  // Methods that get standard errors and coverage.
  std::vector<Method> se_methods = {Method::kProposed};
  int resamples = 500;
  double ci_level = 0.95;
  // Family behind model1; model2 drops its intercept.
  LatentFamily latent_family = LatentFamily::kLogistic;
  LatentTarget latent_target = LatentTarget::kObserved;

  void Validate() const;
};

// Cells for p00 = p11 = p over every (n, p) pair, n-major.
std::vector<Cell> DiagonalCells(const std::vector<int>& ns,
                                const std::vector<double>& ps);
// (p00, p11) over [lo, hi] in steps of `step`, p00-major.
std::vector<Cell> GridCells(int n, double lo, double hi, double step);

// Design, truth and cells for a scenario id. `full_grid` switches A2/B2 to a
// 0.01 step.
ScenarioConfig DefaultScenario(ScenarioId id, bool full_grid = false);

TransitionMatrix CellTransition(const Cell& cell);

// Name of the perturbed sensitive variable: "y" or "x".
std::string SensitiveName(Design design);
EstimandSpec ScenarioEstimand(const ScenarioConfig& cfg);
LatentModelSpec ScenarioLatentModel(const ScenarioConfig& cfg, Method method);

// Dataset with both original and perturbed sensitive values.
Dataset GenerateReplicate(const ScenarioConfig& cfg, std::size_t cell,
                          std::size_t replicate);

// Metrics for one method in one cell. Vectors have one entry per coordinate;
// entries that are undefined (fewer than two usable replicates, or no
// standard errors) are NaN.
struct MethodMetrics {
  Method method = Method::kProposed;
  std::size_t cell = 0;
  int attempted = 0;
  int used = 0;
  int failures = 0;
  // Replicates whose estimate succeeded but whose standard error did not.
  int se_failures = 0;
  Eigen::VectorXd bias;
  Eigen::VectorXd sd;
  Eigen::VectorXd se;
  Eigen::VectorXd cp;
  Eigen::VectorXd mse;
  // Per-replicate estimates and standard errors (rows), successful only.
  Eigen::MatrixXd estimates;
  Eigen::MatrixXd std_errors;
};

struct MetricsTable {
  ScenarioConfig config;
  std::vector<MethodMetrics> rows;

  // Throws kInvalidArgument when absent.
  const MethodMetrics& Find(Method method, std::size_t cell) const;
};

MetricsTable RunScenario(const ScenarioConfig& cfg);

struct RelativeEfficiencyRow {
  std::size_t cell = 0;
  Eigen::VectorXd componentwise;
  // Sum of MSEs of a over sum of MSEs of b.
  double summed = 0.0;
};

// MSE_a / MSE_b per cell. Throws kZeroDenominator when an MSE of b is zero
// and kInvalidArgument when either method is missing.
std::vector<RelativeEfficiencyRow> RelativeEfficiency(const MetricsTable& table,
                                                      Method a, Method b);

// One row per cell x method x coordinate.
void WriteMetricsCsv(std::ostream& out, const MetricsTable& table);
// Configuration, metrics and relative efficiencies against model1 when
// present.
nlohmann::json MetricsJson(const MetricsTable& table);

}  // namespace pram

#endif  // PRAM_SIMLAB_H_
