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

#include "pram/simlab.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "pram/estimators.h"
#include "pram/inference.h"
#include "pram/io.h"
#include "pram/mechanism.h"
#include "pram/parallel.h"
#include "pram/random.h"

namespace pram {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Substream indices below a replicate stream.
constexpr std::uint64_t kCovariateStream = 0;
constexpr std::uint64_t kResponseStream = 1;
constexpr std::uint64_t kMechanismStream = 2;
constexpr std::uint64_t kResampleStream = 16;

struct Draw {
  std::optional<Eigen::VectorXd> beta;
  std::optional<Eigen::VectorXd> se;
};

RandomStream ReplicateStream(const ScenarioConfig& cfg, std::size_t cell,
                             std::size_t replicate) {
  return RandomStream(cfg.seed).Substream(cell).Substream(replicate);
}

bool Contains(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

// Weights the estimate of `method` was solved with, for resampling.
WeightScheme MethodWeights(const Dataset& data, const TransitionMatrix& p,
                           Method method,
                           const std::optional<ModelDependentFit>& fit) {
  switch (method) {
    case Method::kProposed:
      return WeightScheme::InverseTransition(data, InvertTransition(p));
    case Method::kOracle:
      return WeightScheme::IndicatorOriginal(data);
    case Method::kNaive:
      return WeightScheme::IndicatorPerturbed(data);
    case Method::kModel1:
    case Method::kModel2:
      return PosteriorWeights(data, *fit);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method");
}

Draw RunMethod(const ScenarioConfig& cfg, const Dataset& data,
               const TransitionMatrix& p, const EstimatingFunction& u,
               Method method, const RandomStream& stream) {
  Draw draw;
  try {
    std::optional<ModelDependentFit> fit;
    EstimateResult result;
    switch (method) {
      case Method::kProposed:
        result = ProposedEstimate(data, p, u);
        break;
      case Method::kOracle:
        result = OracleEstimate(data, u);
        break;
      case Method::kNaive:
        result = NaiveEstimate(data, u);
        break;
      case Method::kModel1:
      case Method::kModel2:
        fit = FitLatentModel(data, p, ScenarioLatentModel(cfg, method));
        result = ModelDependentEstimate(data, p, u, *fit, {}, method);
        break;
    }
    if (!result.diagnostics.converged || !result.beta_hat.allFinite()) {
      return draw;
    }
    draw.beta = result.beta_hat;
    if (cfg.se_mode == SeMode::kNone || !Contains(cfg.se_methods, method)) {
      return draw;
    }
    const WeightScheme weights = MethodWeights(data, p, method, fit);
    Eigen::MatrixXd cov;
    if (cfg.se_mode == SeMode::kResample) {
      ResampleConfig rcfg;
      rcfg.resamples = cfg.resamples;
      rcfg.seed = stream.Substream(kResampleStream + static_cast<int>(method))
                      .key();
      cov = ResampleVariance(data, u, weights, result.beta_hat, rcfg)
                .covariance;
    } else {
      cov = PluginVariance(data, u, weights, result.beta_hat);
    }
    draw.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  } catch (const Error&) {
    // A failed estimate leaves draw.beta empty; a failed standard error
    // leaves draw.se empty. Both are counted by the caller.
  }
  return draw;
}

MethodMetrics Summarize(const ScenarioConfig& cfg, Method method,
                        std::size_t cell, const std::vector<Draw>& draws,
                        double z) {
  const int d = 2;
  MethodMetrics m;
  m.method = method;
  m.cell = cell;
  m.attempted = static_cast<int>(draws.size());
  const bool want_se =
      cfg.se_mode != SeMode::kNone && Contains(cfg.se_methods, method);

  std::vector<const Draw*> ok;
  for (const Draw& draw : draws) {
    if (draw.beta) ok.push_back(&draw);
  }
  m.used = static_cast<int>(ok.size());
  m.failures = m.attempted - m.used;
  m.estimates.resize(m.used, d);
  int with_se = 0;
  for (const Draw* draw : ok) with_se += draw->se ? 1 : 0;
  m.se_failures = want_se ? m.used - with_se : 0;
  m.std_errors.resize(with_se, d);
  for (int r = 0, s = 0; r < m.used; ++r) {
    m.estimates.row(r) = ok[r]->beta->transpose();
    if (ok[r]->se) m.std_errors.row(s++) = ok[r]->se->transpose();
  }

  const Eigen::VectorXd truth = cfg.beta_true;
  m.bias = Eigen::VectorXd::Constant(d, kNaN);
  m.sd = Eigen::VectorXd::Constant(d, kNaN);
  m.se = Eigen::VectorXd::Constant(d, kNaN);
  m.cp = Eigen::VectorXd::Constant(d, kNaN);
  m.mse = Eigen::VectorXd::Constant(d, kNaN);
  if (m.used == 0) return m;

  const Eigen::VectorXd mean = m.estimates.colwise().mean().transpose();
  m.bias = mean - truth;
  Eigen::VectorXd squared = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd centered = Eigen::VectorXd::Zero(d);
  for (int r = 0; r < m.used; ++r) {
    const Eigen::VectorXd b = m.estimates.row(r).transpose();
    squared += (b - truth).cwiseAbs2();
    centered += (b - mean).cwiseAbs2();
  }
  m.mse = squared / m.used;
  if (m.used >= 2) m.sd = (centered / (m.used - 1)).cwiseSqrt();

  if (with_se > 0) {
    m.se = m.std_errors.colwise().mean().transpose();
    if (m.used >= 2) {
      Eigen::VectorXd covered = Eigen::VectorXd::Zero(d);
      for (const Draw* draw : ok) {
        if (!draw->se) continue;
        for (int j = 0; j < d; ++j) {
          if (std::abs((*draw->beta)(j) - truth(j)) <= z * (*draw->se)(j)) {
            covered(j) += 1.0;
          }
        }
      }
      m.cp = covered / with_se;
    }
  }
  return m;
}

nlohmann::json VectorJson(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      out.push_back(v(i));
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

}  // namespace

std::string_view ScenarioIdName(ScenarioId id) {
  switch (id) {
    case ScenarioId::kA1: return "A1";
    case ScenarioId::kA2: return "A2";
    case ScenarioId::kB1: return "B1";
    case ScenarioId::kB2: return "B2";
    case ScenarioId::kCustom: return "custom";
  }
  return "unknown";
}

std::optional<ScenarioId> ParseScenarioId(std::string_view name) {
  for (ScenarioId id : {ScenarioId::kA1, ScenarioId::kA2, ScenarioId::kB1,
                        ScenarioId::kB2, ScenarioId::kCustom}) {
    if (ScenarioIdName(id) == name) return id;
  }
  return std::nullopt;
}

std::string_view SeModeName(SeMode mode) {
  switch (mode) {
    case SeMode::kNone: return "none";
    case SeMode::kResample: return "resample";
    case SeMode::kPlugin: return "plugin";
  }
  return "unknown";
}

std::optional<SeMode> ParseSeMode(std::string_view name) {
  for (SeMode mode : {SeMode::kNone, SeMode::kResample, SeMode::kPlugin}) {
    if (SeModeName(mode) == name) return mode;
  }
  return std::nullopt;
}

void ScenarioConfig::Validate() const {
  auto fail = [](const std::string& message) {
    throw Error(ErrorCode::kInvalidArgument, message);
  };
  if (cells.empty()) fail("scenario has no cells");
  for (const Cell& cell : cells) {
    if (cell.n < 100) fail("every cell needs n >= 100");
    for (double p : {cell.p00, cell.p11}) {
      if (!(p > 0.5 && p <= 1.0)) {
        fail("transition probabilities must lie in (0.5, 1]");
      }
    }
  }
  if (replicates < 1) fail("need at least one replicate");
  if (methods.empty()) fail("no methods requested");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) fail("duplicate method");
    }
  }
  for (Method m : se_methods) {
    if (!Contains(methods, m)) {
      fail("standard errors requested for a method that is not run");
    }
  }
  if (se_mode == SeMode::kResample && !se_methods.empty() && resamples < 50) {
    fail("need at least 50 resamples");
  }
  if (!(ci_level > 0.0 && ci_level < 1.0)) fail("ci level must lie in (0, 1)");
  if (!beta_true.allFinite()) fail("true coefficients must be finite");
  if (!(x_sd > 0.0) || !(noise_sd > 0.0)) fail("scales must be positive");
  if (!(x_probability > 0.0 && x_probability < 1.0)) {
    fail("x_probability must lie in (0, 1)");
  }
}

std::vector<Cell> DiagonalCells(const std::vector<int>& ns,
                                const std::vector<double>& ps) {
  std::vector<Cell> cells;
  for (int n : ns) {
    for (double p : ps) cells.push_back(Cell{n, p, p});
  }
  return cells;
}

std::vector<Cell> GridCells(int n, double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid grid");
  }
  // Integer indexing keeps the grid points exact decimal roundings.
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<Cell> cells;
  for (int a = 0; a < count; ++a) {
    for (int b = 0; b < count; ++b) {
      const double p00 = std::round((lo + a * step) * 1e9) / 1e9;
      const double p11 = std::round((lo + b * step) * 1e9) / 1e9;
      cells.push_back(Cell{n, p00, p11});
    }
  }
  return cells;
}

ScenarioConfig DefaultScenario(ScenarioId id, bool full_grid) {
  ScenarioConfig cfg;
  cfg.id = id;
  const bool covariate = id == ScenarioId::kB1 || id == ScenarioId::kB2;
  cfg.design = covariate ? Design::kCovariate : Design::kResponse;
  cfg.beta_true = covariate ? Eigen::Vector2d(-1.0, 1.0)
                            : Eigen::Vector2d(-1.0, 1.5);
  switch (id) {
    case ScenarioId::kA1:
    case ScenarioId::kB1:
    case ScenarioId::kCustom:
      cfg.cells = DiagonalCells({1000, 1200, 1400, 1600, 1800, 2000},
                                {0.75, 0.85, 0.95});
      break;
    case ScenarioId::kA2:
    case ScenarioId::kB2:
      cfg.cells = GridCells(1000, 0.75, 0.95, full_grid ? 0.01 : 0.05);
      break;
  }
  return cfg;
}

TransitionMatrix CellTransition(const Cell& cell) {
  return BinaryTransition(cell.p00, cell.p11);
}

std::string SensitiveName(Design design) {
  return design == Design::kResponse ? "y" : "x";
}

EstimandSpec ScenarioEstimand(const ScenarioConfig& cfg) {
  EstimandSpec spec;
  spec.response = "y";
  spec.covariates = {"x"};
  spec.intercept = true;
  spec.levels = 2;
  spec.sensitive_column = SensitiveName(cfg.design);
  if (cfg.design == Design::kResponse) {
    spec.kind = EstimandKind::kLogistic;
    spec.sensitive_role = SensitiveRole::kResponse;
  } else {
    spec.kind = EstimandKind::kLinear;
    spec.sensitive_role = SensitiveRole::kCovariate;
  }
  return spec;
}

LatentModelSpec ScenarioLatentModel(const ScenarioConfig& cfg, Method method) {
  LatentModelSpec spec;
  spec.family = method == Method::kModel2 ? WithoutIntercept(cfg.latent_family)
                                          : cfg.latent_family;
  spec.covariates = {cfg.design == Design::kResponse ? "x" : "y"};
  spec.target = cfg.latent_target;
  return spec;
}

Dataset GenerateReplicate(const ScenarioConfig& cfg, std::size_t cell,
                          std::size_t replicate) {
  if (cell >= cfg.cells.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cell index out of range");
  }
  const Cell& c = cfg.cells[cell];
  const auto n = static_cast<std::size_t>(c.n);
  const RandomStream stream = ReplicateStream(cfg, cell, replicate);
  const RandomStream xs = stream.Substream(kCovariateStream);
  const RandomStream ys = stream.Substream(kResponseStream);
  const double b0 = cfg.beta_true(0);
  const double b1 = cfg.beta_true(1);

  std::vector<double> numeric(n);
  std::vector<int> levels(n);
  if (cfg.design == Design::kResponse) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = cfg.x_mean + cfg.x_sd * xs.Normal(i);
      numeric[i] = x;
      levels[i] = ys.Uniform(i) < Expit(b0 + b1 * x) ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const int x = xs.Uniform(i) < cfg.x_probability ? 1 : 0;
      levels[i] = x;
      numeric[i] = b0 + b1 * x + cfg.noise_sd * ys.Normal(i);
    }
  }
  Dataset data(SensitiveName(cfg.design), 2);
  data.AddColumn(cfg.design == Design::kResponse ? "x" : "y",
                 std::move(numeric));
  std::vector<int> perturbed = PerturbLevels(
      levels, CellTransition(c), stream.Substream(kMechanismStream).key());
  data.SetSensitive(SensitiveTag::kOriginal, std::move(levels));
  data.SetSensitive(SensitiveTag::kPerturbed, std::move(perturbed));
  return data;
}

const MethodMetrics& MetricsTable::Find(Method method, std::size_t cell) const {
  for (const MethodMetrics& row : rows) {
    if (row.method == method && row.cell == cell) return row;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no metrics for method " + std::string(MethodName(method)));
}

MetricsTable RunScenario(const ScenarioConfig& cfg) {
  cfg.Validate();
  const std::size_t num_cells = cfg.cells.size();
  const auto replicates = static_cast<std::size_t>(cfg.replicates);
  const std::size_t num_methods = cfg.methods.size();
  // draws[(cell * R + r) * methods + m]
  std::vector<Draw> draws(num_cells * replicates * num_methods);
  const EstimandSpec spec = ScenarioEstimand(cfg);

  ParallelFor(num_cells * replicates, [&](std::size_t task) {
    const std::size_t cell = task / replicates;
    const std::size_t r = task % replicates;
    const Dataset data = GenerateReplicate(cfg, cell, r);
    const TransitionMatrix p = CellTransition(cfg.cells[cell]);
    const EstimatingFunction u = BuildEstimatingFunction(spec, data);
    const RandomStream stream = ReplicateStream(cfg, cell, r);
    for (std::size_t m = 0; m < num_methods; ++m) {
      draws[task * num_methods + m] =
          RunMethod(cfg, data, p, u, cfg.methods[m], stream);
    }
  });

  MetricsTable table;
  table.config = cfg;
  const double z = NormalQuantile(0.5 * (1.0 + cfg.ci_level));
  for (std::size_t cell = 0; cell < num_cells; ++cell) {
    for (std::size_t m = 0; m < num_methods; ++m) {
      std::vector<Draw> mine;
      mine.reserve(replicates);
      for (std::size_t r = 0; r < replicates; ++r) {
        mine.push_back(draws[(cell * replicates + r) * num_methods + m]);
      }
      table.rows.push_back(Summarize(cfg, cfg.methods[m], cell, mine, z));
    }
  }
  return table;
}

std::vector<RelativeEfficiencyRow> RelativeEfficiency(const MetricsTable& table,
                                                      Method a, Method b) {
  std::vector<RelativeEfficiencyRow> out;
  for (std::size_t cell = 0; cell < table.config.cells.size(); ++cell) {
    const MethodMetrics& ma = table.Find(a, cell);
    const MethodMetrics& mb = table.Find(b, cell);
    if ((mb.mse.array() == 0.0).any() || mb.mse.sum() == 0.0) {
      throw Error(ErrorCode::kZeroDenominator,
                  "reference method has zero MSE");
    }
    RelativeEfficiencyRow row;
    row.cell = cell;
    row.componentwise = ma.mse.cwiseQuotient(mb.mse);
    row.summed = ma.mse.sum() / mb.mse.sum();
    out.push_back(std::move(row));
  }
  return out;
}

void WriteMetricsCsv(std::ostream& out, const MetricsTable& table) {
  out << "scenario,cell,n,p00,p11,method,coordinate,attempted,used,failures,"
         "se_failures,bias,sd,se,cp,mse\n";
  const std::string scenario(ScenarioIdName(table.config.id));
  for (const MethodMetrics& m : table.rows) {
    const Cell& cell = table.config.cells[m.cell];
    for (Eigen::Index j = 0; j < m.bias.size(); ++j) {
      out << scenario << ',' << m.cell << ',' << cell.n << ','
          << FormatDouble(cell.p00) << ',' << FormatDouble(cell.p11) << ','
          << MethodName(m.method) << ",beta" << j << ',' << m.attempted << ','
          << m.used << ',' << m.failures << ',' << m.se_failures << ','
          << FormatDouble(m.bias(j)) << ',' << FormatDouble(m.sd(j)) << ','
          << FormatDouble(m.se(j)) << ',' << FormatDouble(m.cp(j)) << ','
          << FormatDouble(m.mse(j)) << '\n';
    }
  }
}

nlohmann::json MetricsJson(const MetricsTable& table) {
  const ScenarioConfig& cfg = table.config;
  nlohmann::json out;
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(MethodName(m)));
  nlohmann::json se_methods = nlohmann::json::array();
  for (Method m : cfg.se_methods) {
    se_methods.push_back(std::string(MethodName(m)));
  }
  out["config"] = {
      {"scenario", std::string(ScenarioIdName(cfg.id))},
      {"design", cfg.design == Design::kResponse ? "response" : "covariate"},
      {"beta_true", VectorJson(cfg.beta_true)},
      {"seed", cfg.seed},
      {"replicates", cfg.replicates},
      {"methods", methods},
      {"se_mode", std::string(SeModeName(cfg.se_mode))},
      {"se_methods", se_methods},
      {"resamples", cfg.resamples},
      {"ci_level", cfg.ci_level},
      {"latent_family", std::string(LatentFamilyName(cfg.latent_family))},
      {"latent_target", std::string(LatentTargetName(cfg.latent_target))}};

  nlohmann::json metrics = nlohmann::json::array();
  for (const MethodMetrics& m : table.rows) {
    const Cell& cell = cfg.cells[m.cell];
    metrics.push_back({{"cell", m.cell},
                       {"n", cell.n},
                       {"p00", cell.p00},
                       {"p11", cell.p11},
                       {"method", std::string(MethodName(m.method))},
                       {"attempted", m.attempted},
                       {"used", m.used},
                       {"failures", m.failures},
                       {"se_failures", m.se_failures},
                       {"bias", VectorJson(m.bias)},
                       {"sd", VectorJson(m.sd)},
                       {"se", VectorJson(m.se)},
                       {"cp", VectorJson(m.cp)},
                       {"mse", VectorJson(m.mse)}});
  }
  out["metrics"] = metrics;

  nlohmann::json efficiency = nlohmann::json::array();
  if (Contains(cfg.methods, Method::kModel1)) {
    for (Method a : cfg.methods) {
      if (a == Method::kModel1) continue;
      try {
        for (const auto& row : RelativeEfficiency(table, a, Method::kModel1)) {
          efficiency.push_back(
              {{"cell", row.cell},
               {"method", std::string(MethodName(a))},
               {"reference", "model1"},
               {"componentwise", VectorJson(row.componentwise)},
               {"summed", std::isfinite(row.summed)
                              ? nlohmann::json(row.summed)
                              : nlohmann::json(nullptr)}});
        }
      } catch (const Error&) {
        // Zero reference MSE; nothing meaningful to report.
      }
    }
  }
  out["relative_efficiency"] = efficiency;
  return out;
}

}  // namespace pram
