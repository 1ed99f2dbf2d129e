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

// Variance and interval estimation for estimating-equation estimators.
//
// Two covariance estimators are offered:
//
//   ResampleVariance  re-solves (1/n) sum_i L_i phi_i(beta) = 0 for M draws of
//                     iid multipliers L_i with mean 1 and variance 1 and takes
//                     the sample covariance of the M solutions.
//   PluginVariance    Omega^-1 [(1/n) sum_i phi_i phi_i'] Omega^-T / n.

#ifndef PRAM_INFERENCE_H_
#define PRAM_INFERENCE_H_

#include <cstdint>

#include <Eigen/Dense>

#include "pram/core.h"
#include "pram/solver.h"

namespace pram {

enum class MultiplierLaw {
  // Unit-rate exponential.
  kExponential,
  // 0 or 2 with probability 1/2 each.
  kTwoPoint,
  // L = 1 always. Breaks the variance contract; for tests only.
  kConstantOneTestOnly,
};

struct ResampleConfig {
  int resamples = 500;
  MultiplierLaw law = MultiplierLaw::kExponential;
  std::uint64_t seed = 0;
  // More failed resamples than this fraction raise kTooManyFailures.
  double max_failure_fraction = 0.05;

  void Validate() const;
};

// Multiplier for record `record` in resample `resample`.
double DrawMultiplier(const ResampleConfig& cfg, std::uint64_t resample,
                      std::uint64_t record);

struct ResampleOutcome {
  Eigen::MatrixXd covariance;
  int used = 0;
  int failures = 0;
};

// `weights` must be the scheme the estimator used. Each resample is
// warm-started at beta_hat; resamples that fail to converge or throw are
// dropped and counted.
ResampleOutcome ResampleVariance(const Dataset& data,
                                 const EstimatingFunction& u,
                                 const WeightScheme& weights,
                                 const Eigen::VectorXd& beta_hat,
                                 const ResampleConfig& cfg,
                                 const SolverConfig& solver_cfg = {});

// Inverse-transition weights built from P.
ResampleOutcome ResampleVariance(const Dataset& data, const TransitionMatrix& p,
                                 const EstimatingFunction& u,
                                 const Eigen::VectorXd& beta_hat,
                                 const ResampleConfig& cfg,
                                 const SolverConfig& solver_cfg = {});

// Throws kSingularOmega when the condition number of Omega exceeds 1e10.
Eigen::MatrixXd PluginVariance(const Dataset& data, const EstimatingFunction& u,
                               const WeightScheme& weights,
                               const Eigen::VectorXd& beta_hat,
                               const SolverConfig& solver_cfg = {});

Eigen::MatrixXd PluginVariance(const Dataset& data, const TransitionMatrix& p,
                               const EstimatingFunction& u,
                               const Eigen::VectorXd& beta_hat,
                               const SolverConfig& solver_cfg = {});

// Price of perturbation at beta, for data holding both sensitive columns.
// With Omega taken from the inverse-transition weights:
//   proposed = Omega^-1 [(1/n) sum phi_i phi_i'] Omega^-T / n
//   oracle   = Omega^-1 [(1/n) sum U_i U_i'] Omega^-T / n
//   loss     = Omega^-1 [(1/n) sum (phi_i - U_i)(phi_i - U_i)'] Omega^-T / n
// where U_i is evaluated at the original level.
struct EfficiencyLoss {
  Eigen::MatrixXd proposed;
  Eigen::MatrixXd oracle;
  Eigen::MatrixXd loss;
};
EfficiencyLoss EfficiencyLossDecomposition(const Dataset& data,
                                           const TransitionMatrix& p,
                                           const EstimatingFunction& u,
                                           const Eigen::VectorXd& beta);

// Standard normal quantile.
double NormalQuantile(double probability);

// beta_hat_j -/+ z_{(1 + level)/2} SE_j. Requires result.covariance.
void ConfidenceIntervals(EstimateResult& result, double level);

// Symmetrizes `covariance`, stores it with standard errors and intervals.
void AttachCovariance(EstimateResult& result, const Eigen::MatrixXd& covariance,
                      double level = 0.95);

}  // namespace pram

#endif  // PRAM_INFERENCE_H_
