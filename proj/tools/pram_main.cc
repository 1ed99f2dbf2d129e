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

// Command-line front end.
//
//   pram perturb       perturb a sensitive column of a CSV file
//   pram estimate      estimate parameters from perturbed data
//   pram variance      covariance of the proposed estimate
//   pram recover-freq  recover true-level frequencies
//   pram simulate      run a simulation scenario
//
// Exit status is 0 on success, 2 on invalid input and 1 on I/O failure.
// Every failure prints one line "error: <Code>: <message>" to stderr.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pram/core.h"
#include "pram/estfun.h"
#include "pram/estimators.h"
#include "pram/inference.h"
#include "pram/io.h"
#include "pram/mechanism.h"
#include "pram/model_dependent.h"
#include "pram/parallel.h"
#include "pram/simlab.h"

namespace pram {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

struct SeedOption {
  std::optional<std::uint64_t> value;

  // Falls back to PRAM_SEED.
  std::uint64_t Resolve() const {
    if (value) return *value;
    if (const char* env = std::getenv("PRAM_SEED")) {
      std::uint64_t parsed = 0;
      std::istringstream in(env);
      if (in >> parsed && in.eof()) return parsed;
      throw Error(ErrorCode::kInvalidArgument,
                  "PRAM_SEED is not an unsigned integer");
    }
    throw Error(ErrorCode::kInvalidArgument,
                "no seed given; pass --seed or set PRAM_SEED");
  }
};

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::string JsonText(const nlohmann::json& json) { return json.dump(2) + "\n"; }

std::string FormatVector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += " ";
    out += FormatDouble(v(i));
  }
  return out;
}

TransitionMatrix LoadTransition(const std::string& path) {
  return ValidateTransition(ReadMatrixCsvFile(path));
}

void PrintWarnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---- perturb ---------------------------------------------------------------

struct PerturbArgs {
  std::string data;
  std::string sensitive;
  int levels = 2;
  std::string matrix;
  SeedOption seed;
  std::string out;
  bool recode = false;
};

void RunPerturb(const PerturbArgs& args) {
  const TransitionMatrix p = LoadTransition(args.matrix);
  if (p.k() != args.levels) {
    std::ostringstream msg;
    msg << "matrix has K = " << p.k() << " but --levels is " << args.levels;
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  const std::uint64_t seed = args.seed.Resolve();
  CsvTable table = ReadCsvFile(args.data);
  std::vector<int> original;
  if (args.recode) {
    Recoding recoding = RecodeLevels(table, args.sensitive);
    if (static_cast<int>(recoding.mapping.size()) > args.levels) {
      std::ostringstream msg;
      msg << "column '" << args.sensitive << "' has "
          << recoding.mapping.size() << " distinct values but --levels is "
          << args.levels;
      throw Error(ErrorCode::kLevelOutOfRange, msg.str());
    }
    for (const auto& [value, code] : recoding.mapping) {
      std::cout << "recode " << value << " -> " << code << "\n";
    }
    original = std::move(recoding.codes);
  } else {
    original = ParseLevels(table, args.sensitive, args.levels);
  }
  const std::vector<int> perturbed = PerturbLevels(original, p, seed);
  std::vector<std::string> column;
  column.reserve(perturbed.size());
  for (int level : perturbed) column.push_back(std::to_string(level));
  table.AppendColumn(args.sensitive + "_pram", std::move(column));
  WriteCsvFile(args.out, table);

  std::cout << "records " << table.rows.size() << "\n";
  std::cout << "K " << p.k() << "\n";
  std::cout << "condition_number " << FormatDouble(p.condition_number())
            << "\n";
  std::cout << "diagonal " << FormatVector(p.entries().diagonal()) << "\n";
  std::cout << "seed " << seed << "\n";
  PrintWarnings(p.warnings());
}

// ---- estimate / variance ----------------------------------------------------

struct EstimateArgs {
  std::string data;
  std::string matrix;
  std::string estimand;
  std::string method = "proposed";
  std::optional<std::string> original;
  std::string latent_family = "logistic";
  bool no_intercept = false;
  std::vector<std::string> latent_covariates;
  std::string latent_target = "observed";
  std::string with_se;
  int resamples = 500;
  SeedOption seed;
  double level = 0.95;
  std::string out;
};

struct Problem {
  EstimandSpec spec;
  Dataset data;
  std::optional<TransitionMatrix> p;
  EstimatingFunction u;
};

Problem LoadProblem(const std::string& data_path, const std::string& estimand,
                    const std::optional<std::string>& matrix,
                    const std::optional<std::string>& original) {
  const EstimandSpec spec = LoadEstimandSpec(estimand);
  const CsvTable table = ReadCsvFile(data_path);
  std::optional<TransitionMatrix> p;
  if (matrix) p = LoadTransition(*matrix);
  Dataset data =
      DatasetFromCsv(table, spec.sensitive_column, spec.levels,
                     table.FindColumn(spec.sensitive_column)
                         ? std::optional<std::string>(spec.sensitive_column)
                         : std::nullopt,
                     original);
  EstimatingFunction u = BuildEstimatingFunction(spec, data);
  return Problem{spec, std::move(data), std::move(p), std::move(u)};
}

void RequirePerturbed(const Problem& problem) {
  if (!problem.data.has(SensitiveTag::kPerturbed)) {
    throw Error(ErrorCode::kMissingColumn,
                "column '" + problem.spec.sensitive_column + "' not found");
  }
}

const TransitionMatrix& RequireMatrix(const Problem& problem) {
  if (!problem.p) {
    throw Error(ErrorCode::kInvalidArgument, "this method needs --matrix");
  }
  return *problem.p;
}

// Latent covariates default to the estimand variables other than the
// sensitive one.
LatentTarget ParseTarget(const std::string& name) {
  const auto target = ParseLatentTarget(name);
  if (!target) {
    throw Error(ErrorCode::kInvalidArgument,
                "--latent-target must be observed or latent");
  }
  return *target;
}

LatentModelSpec LatentSpec(const EstimateArgs& args, const EstimandSpec& spec,
                           Method method) {
  LatentModelSpec latent;
  const auto family = ParseLatentFamily(args.latent_family);
  if (!family || !HasIntercept(*family)) {
    throw Error(ErrorCode::kInvalidArgument,
                "--latent-family must be logistic or probit");
  }
  latent.family = (method == Method::kModel2 || args.no_intercept)
                      ? WithoutIntercept(*family)
                      : *family;
  latent.target = ParseTarget(args.latent_target);
  if (!args.latent_covariates.empty()) {
    latent.covariates = args.latent_covariates;
  } else {
    std::vector<std::string> names = spec.covariates;
    names.push_back(spec.response);
    for (const auto& name : names) {
      if (name == spec.sensitive_column) continue;
      if (std::find(latent.covariates.begin(), latent.covariates.end(),
                    name) == latent.covariates.end()) {
        latent.covariates.push_back(name);
      }
    }
  }
  return latent;
}

nlohmann::json RunEstimate(const EstimateArgs& args) {
  const auto method = ParseMethod(args.method);
  if (!method) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown method '" + args.method + "'");
  }
  std::optional<std::string> matrix;
  if (!args.matrix.empty()) matrix = args.matrix;
  Problem problem = LoadProblem(args.data, args.estimand, matrix, args.original);

  EstimateResult result;
  std::optional<WeightScheme> weights;
  std::optional<ModelDependentFit> fit;
  switch (*method) {
    case Method::kProposed: {
      RequirePerturbed(problem);
      const TransitionMatrix& p = RequireMatrix(problem);
      result = ProposedEstimate(problem.data, p, problem.u);
      weights = WeightScheme::InverseTransition(problem.data,
                                                InvertTransition(p));
      break;
    }
    case Method::kOracle:
      if (!problem.data.has(SensitiveTag::kOriginal)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "oracle needs the original column (--original COL)");
      }
      result = OracleEstimate(problem.data, problem.u);
      weights = WeightScheme::IndicatorOriginal(problem.data);
      break;
    case Method::kNaive:
      RequirePerturbed(problem);
      result = NaiveEstimate(problem.data, problem.u);
      weights = WeightScheme::IndicatorPerturbed(problem.data);
      break;
    case Method::kModel1:
    case Method::kModel2: {
      RequirePerturbed(problem);
      const TransitionMatrix& p = RequireMatrix(problem);
      fit = FitLatentModel(problem.data, p,
                           LatentSpec(args, problem.spec, *method));
      result = ModelDependentEstimate(problem.data, p, problem.u, *fit, {},
                                      *method);
      weights = PosteriorWeights(problem.data, *fit);
      break;
    }
  }

  nlohmann::json plugin_json;
  nlohmann::json resample_json;
  if (!args.with_se.empty()) {
    const bool resample = args.with_se == "resample" || args.with_se == "both";
    const bool plugin = args.with_se == "plugin" || args.with_se == "both";
    if (!resample && !plugin) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--with-se must be resample, plugin or both");
    }
    std::optional<Eigen::MatrixXd> plugin_cov;
    if (plugin) {
      plugin_cov = PluginVariance(problem.data, problem.u, *weights,
                                  result.beta_hat);
    }
    if (resample) {
      ResampleConfig rcfg;
      rcfg.resamples = args.resamples;
      rcfg.seed = args.seed.Resolve();
      const ResampleOutcome outcome = ResampleVariance(
          problem.data, problem.u, *weights, result.beta_hat, rcfg);
      AttachCovariance(result, outcome.covariance, args.level);
      resample_json = {{"resamples", rcfg.resamples},
                       {"used", outcome.used},
                       {"failures", outcome.failures},
                       {"seed", rcfg.seed}};
      if (plugin_cov) {
        EstimateResult alt = result;
        AttachCovariance(alt, *plugin_cov, args.level);
        plugin_json = ResultToJson(alt);
      }
    } else {
      AttachCovariance(result, *plugin_cov, args.level);
    }
  }

  nlohmann::json out = ResultToJson(result);
  out["se_method"] = args.with_se.empty()
                         ? nlohmann::json(nullptr)
                         : nlohmann::json(args.with_se == "plugin" ? "plugin"
                                                                   : "resample");
  if (!resample_json.is_null()) out["resample"] = resample_json;
  if (!plugin_json.is_null()) {
    out["plugin"] = {{"covariance", plugin_json["covariance"]},
                     {"std_errors", plugin_json["std_errors"]},
                     {"ci", plugin_json["ci"]}};
  }
  if (fit) {
    nlohmann::json theta = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fit->theta().size(); ++i) {
      theta.push_back(fit->theta()(i));
    }
    out["latent_model"] = {
        {"family", std::string(LatentFamilyName(fit->spec().family))},
        {"target", std::string(LatentTargetName(fit->spec().target))},
        {"covariates", fit->spec().covariates},
        {"theta", theta},
        {"log_likelihood", fit->log_likelihood()},
        {"converged", fit->converged()}};
  }
  if (problem.p) PrintWarnings(problem.p->warnings());
  return out;
}

struct VarianceArgs {
  std::string data;
  std::string matrix;
  std::string estimand;
  std::string method = "resample";
  int resamples = 500;
  SeedOption seed;
  double level = 0.95;
  std::string out;
};

nlohmann::json RunVariance(const VarianceArgs& args) {
  Problem problem =
      LoadProblem(args.data, args.estimand, args.matrix, std::nullopt);
  RequirePerturbed(problem);
  const TransitionMatrix& p = RequireMatrix(problem);
  EstimateResult result = ProposedEstimate(problem.data, p, problem.u);
  nlohmann::json extra;
  if (args.method == "resample") {
    ResampleConfig rcfg;
    rcfg.resamples = args.resamples;
    rcfg.seed = args.seed.Resolve();
    const ResampleOutcome outcome =
        ResampleVariance(problem.data, p, problem.u, result.beta_hat, rcfg);
    AttachCovariance(result, outcome.covariance, args.level);
    extra = {{"resamples", rcfg.resamples},
             {"used", outcome.used},
             {"failures", outcome.failures},
             {"seed", rcfg.seed}};
  } else if (args.method == "plugin") {
    AttachCovariance(result,
                     PluginVariance(problem.data, p, problem.u,
                                    result.beta_hat),
                     args.level);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "--method must be resample or plugin");
  }
  nlohmann::json out = ResultToJson(result);
  out["se_method"] = args.method;
  if (!extra.is_null()) out["resample"] = extra;
  PrintWarnings(p.warnings());
  return out;
}

// ---- recover-freq -------------------------------------------------------------

struct RecoverArgs {
  std::string data;
  std::string column;
  std::vector<double> observed;
  int levels = 2;
  std::string matrix;
  bool project = false;
  std::string out;
};

nlohmann::json RunRecover(const RecoverArgs& args) {
  const TransitionMatrix p = LoadTransition(args.matrix);
  std::optional<FrequencyVector> observed;
  if (!args.observed.empty()) {
    observed = FrequencyVector(
        Eigen::Map<const Eigen::VectorXd>(args.observed.data(),
                                          args.observed.size()),
        FrequencyTag::kProper);
  } else if (!args.data.empty() && !args.column.empty()) {
    const CsvTable table = ReadCsvFile(args.data);
    observed =
        EmpiricalFrequencies(ParseLevels(table, args.column, args.levels),
                             args.levels);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "give --observed or both --data and --column");
  }
  const FrequencyVector recovered =
      RecoverFrequencies(*observed, InvertTransition(p));
  auto to_json = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json out = {{"observed", to_json(observed->probs())},
                        {"recovered", to_json(recovered.probs())},
                        {"outside_simplex", recovered.outside_simplex()}};
  if (args.project) {
    out["projected"] = to_json(ProjectToSimplex(recovered).probs());
  }
  if (recovered.outside_simplex()) {
    std::cerr << "warning: recovered frequencies leave the simplex\n";
  }
  PrintWarnings(p.warnings());
  return out;
}

// ---- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string scenario = "A1";
  std::vector<int> n;
  std::vector<double> p;
  bool full_grid = false;
  double grid_step = 0.0;
  int replicates = 500;
  int resamples = 500;
  std::vector<std::string> methods = {"proposed"};
  std::vector<std::string> se_methods = {"proposed"};
  std::string se = "resample";
  std::string design = "response";
  std::vector<double> beta;
  std::string latent_family = "logistic";
  std::string latent_target = "observed";
  SeedOption seed;
  double level = 0.95;
  std::string out;
  std::string summary;
};

std::vector<Method> ParseMethods(const std::vector<std::string>& names) {
  std::vector<Method> methods;
  for (const auto& name : names) {
    const auto m = ParseMethod(name);
    if (!m) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown method '" + name + "'");
    }
    methods.push_back(*m);
  }
  return methods;
}

void RunSimulate(const SimulateArgs& args) {
  const auto id = ParseScenarioId(args.scenario);
  if (!id) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown scenario '" + args.scenario + "'");
  }
  ScenarioConfig cfg = DefaultScenario(*id, args.full_grid);
  if (*id == ScenarioId::kCustom) {
    if (args.design == "response") {
      cfg.design = Design::kResponse;
    } else if (args.design == "covariate") {
      cfg.design = Design::kCovariate;
      cfg.beta_true = Eigen::Vector2d(-1.0, 1.0);
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "--design must be response or covariate");
    }
  }
  if (!args.beta.empty()) {
    if (args.beta.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument, "--beta takes two values");
    }
    cfg.beta_true = Eigen::Vector2d(args.beta[0], args.beta[1]);
  }
  const bool grid = *id == ScenarioId::kA2 || *id == ScenarioId::kB2;
  if (grid) {
    if (args.n.size() > 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid scenarios take a single --n");
    }
    const int n = args.n.empty() ? 1000 : args.n[0];
    const double step =
        args.grid_step > 0.0 ? args.grid_step : (args.full_grid ? 0.01 : 0.05);
    cfg.cells = GridCells(n, 0.75, 0.95, step);
    if (!args.p.empty()) {
      cfg.cells = DiagonalCells({n}, args.p);
    }
  } else if (!args.n.empty() || !args.p.empty()) {
    std::vector<int> ns = args.n;
    std::vector<double> ps = args.p;
    if (ns.empty()) ns = {1000, 1200, 1400, 1600, 1800, 2000};
    if (ps.empty()) ps = {0.75, 0.85, 0.95};
    cfg.cells = DiagonalCells(ns, ps);
  }
  cfg.replicates = args.replicates;
  cfg.resamples = args.resamples;
  cfg.seed = args.seed.Resolve();
  cfg.methods = ParseMethods(args.methods);
  const auto se = ParseSeMode(args.se);
  if (!se) {
    throw Error(ErrorCode::kInvalidArgument,
                "--se must be resample, plugin or none");
  }
  cfg.se_mode = *se;
  cfg.se_methods.clear();
  for (Method m : ParseMethods(args.se_methods)) {
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) !=
        cfg.methods.end()) {
      cfg.se_methods.push_back(m);
    }
  }
  const auto family = ParseLatentFamily(args.latent_family);
  if (!family || !HasIntercept(*family)) {
    throw Error(ErrorCode::kInvalidArgument,
                "--latent-family must be logistic or probit");
  }
  cfg.latent_family = *family;
  cfg.latent_target = ParseTarget(args.latent_target);
  cfg.ci_level = args.level;

  const MetricsTable table = RunScenario(cfg);
  std::ostringstream csv;
  WriteMetricsCsv(csv, table);
  WriteText(args.out, csv.str());

  std::string summary = args.summary;
  if (summary.empty() && !args.out.empty() && args.out != "-") {
    summary = args.out;
    const auto dot = summary.rfind('.');
    const auto slash = summary.rfind('/');
    if (dot != std::string::npos &&
        (slash == std::string::npos || dot > slash)) {
      summary.erase(dot);
    }
    summary += ".json";
  }
  if (!summary.empty()) WriteText(summary, JsonText(MetricsJson(table)));

  int failures = 0;
  for (const auto& row : table.rows) failures += row.failures + row.se_failures;
  if (failures > 0) {
    std::cerr << "warning: " << failures
              << " replicate estimates or standard errors failed\n";
  }
}

int Report(const Error& e) {
  std::cerr << "error: " << ErrorCodeName(e.code()) << ": " << e.what()
            << "\n";
  return e.code() == ErrorCode::kIo ? kExitIo : kExitInvalid;
}

int Main(int argc, char** argv) {
  CLI::App app{"Post-randomization toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (default: logical cores)")
      ->check(CLI::NonNegativeNumber);

  PerturbArgs perturb;
  auto* perturb_cmd = app.add_subcommand("perturb", "Perturb a column");
  perturb_cmd->add_option("--data", perturb.data, "Input CSV")->required();
  perturb_cmd->add_option("--sensitive", perturb.sensitive, "Column to perturb")
      ->required();
  perturb_cmd->add_option("--levels", perturb.levels, "Number of levels K")
      ->required();
  perturb_cmd->add_option("--matrix", perturb.matrix, "Transition matrix CSV")
      ->required();
  perturb_cmd->add_option("--seed", perturb.seed.value, "Seed");
  perturb_cmd->add_option("--out", perturb.out, "Output CSV")->required();
  perturb_cmd->add_flag("--recode", perturb.recode,
                        "Map string levels to 0..K-1 in sorted order");

  EstimateArgs estimate;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate parameters");
  estimate_cmd->add_option("--data", estimate.data, "Input CSV")->required();
  estimate_cmd->add_option("--matrix", estimate.matrix,
                           "Transition matrix CSV");
  estimate_cmd->add_option("--estimand", estimate.estimand,
                           "Estimand JSON (inline or path)")
      ->required();
  estimate_cmd->add_option("--method", estimate.method,
                           "proposed|oracle|naive|model1|model2");
  estimate_cmd->add_option("--original", estimate.original,
                           "Column holding original levels");
  estimate_cmd->add_option("--latent-family", estimate.latent_family,
                           "logistic|probit");
  estimate_cmd->add_flag("--no-intercept", estimate.no_intercept,
                         "Drop the latent model intercept");
  estimate_cmd->add_option("--latent-covariates", estimate.latent_covariates,
                           "Latent model covariates")
      ->delimiter(',');
  estimate_cmd->add_option("--latent-target", estimate.latent_target,
                           "observed|latent");
  estimate_cmd->add_option("--with-se", estimate.with_se,
                           "resample|plugin|both");
  estimate_cmd->add_option("-M,--resamples", estimate.resamples,
                           "Resamples");
  estimate_cmd->add_option("--seed", estimate.seed.value, "Resampling seed");
  estimate_cmd->add_option("--level", estimate.level, "Confidence level");
  estimate_cmd->add_option("--out", estimate.out, "Output JSON");

  VarianceArgs variance;
  auto* variance_cmd =
      app.add_subcommand("variance", "Covariance of the proposed estimate");
  variance_cmd->add_option("--data", variance.data, "Input CSV")->required();
  variance_cmd->add_option("--matrix", variance.matrix, "Transition matrix CSV")
      ->required();
  variance_cmd->add_option("--estimand", variance.estimand, "Estimand JSON")
      ->required();
  variance_cmd->add_option("--method", variance.method, "resample|plugin");
  variance_cmd->add_option("-M,--resamples", variance.resamples, "Resamples");
  variance_cmd->add_option("--seed", variance.seed.value, "Resampling seed");
  variance_cmd->add_option("--level", variance.level, "Confidence level");
  variance_cmd->add_option("--out", variance.out, "Output JSON");

  RecoverArgs recover;
  auto* recover_cmd =
      app.add_subcommand("recover-freq", "Recover true-level frequencies");
  recover_cmd->add_option("--data", recover.data, "Input CSV");
  recover_cmd->add_option("--column", recover.column, "Perturbed column");
  recover_cmd->add_option("--observed", recover.observed,
                          "Observed frequencies")
      ->delimiter(',');
  recover_cmd->add_option("--levels", recover.levels, "Number of levels K");
  recover_cmd->add_option("--matrix", recover.matrix, "Transition matrix CSV")
      ->required();
  recover_cmd->add_flag("--project-simplex", recover.project,
                        "Also report the projection onto the simplex");
  recover_cmd->add_option("--out", recover.out, "Output JSON");

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario");
  simulate_cmd->add_option("--scenario", simulate.scenario,
                           "A1|A2|B1|B2|custom");
  simulate_cmd->add_option("--n", simulate.n, "Sample sizes")->delimiter(',');
  simulate_cmd->add_option("--p", simulate.p, "p00 = p11 values")
      ->delimiter(',');
  simulate_cmd->add_flag("--full-grid", simulate.full_grid,
                         "Grid step 0.01 for A2/B2");
  simulate_cmd->add_option("--grid-step", simulate.grid_step,
                           "Grid step for A2/B2");
  simulate_cmd->add_option("-R,--replicates", simulate.replicates,
                           "Replicates per cell");
  simulate_cmd->add_option("-M,--resamples", simulate.resamples,
                           "Resamples per standard error");
  simulate_cmd->add_option("--methods", simulate.methods, "Methods")
      ->delimiter(',');
  simulate_cmd->add_option("--se", simulate.se, "resample|plugin|none");
  simulate_cmd->add_option("--se-methods", simulate.se_methods,
                           "Methods that get standard errors")
      ->delimiter(',');
  simulate_cmd->add_option("--design", simulate.design,
                           "response|covariate (custom scenario)");
  simulate_cmd->add_option("--beta", simulate.beta, "True (b0,b1)")
      ->delimiter(',');
  simulate_cmd->add_option("--latent-family", simulate.latent_family,
                           "logistic|probit");
  simulate_cmd->add_option("--latent-target", simulate.latent_target,
                           "observed|latent");
  simulate_cmd->add_option("--seed", simulate.seed.value, "Master seed");
  simulate_cmd->add_option("--level", simulate.level, "Confidence level");
  simulate_cmd->add_option("--out", simulate.out, "Metrics CSV")->required();
  simulate_cmd->add_option("--summary", simulate.summary,
                           "JSON summary (default: next to --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    std::cerr << "error: InvalidArgument: " << message << "\n";
    return kExitInvalid;
  }
  if (threads > 0) SetThreadCount(threads);

  try {
    if (*perturb_cmd) {
      RunPerturb(perturb);
    } else if (*estimate_cmd) {
      WriteText(estimate.out, JsonText(RunEstimate(estimate)));
    } else if (*variance_cmd) {
      WriteText(variance.out, JsonText(RunVariance(variance)));
    } else if (*recover_cmd) {
      WriteText(recover.out, JsonText(RunRecover(recover)));
    } else if (*simulate_cmd) {
      RunSimulate(simulate);
    }
  } catch (const Error& e) {
    return Report(e);
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace
}  // namespace pram

int main(int argc, char** argv) { return pram::Main(argc, argv); }
