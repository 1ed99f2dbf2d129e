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

// Damped Newton solver for weighted empirical estimating equations
//
//   g(beta) = (1/n) sum_i sum_k w_ik U(k, record_i; beta) = 0.
//
// Every estimator in the toolkit is this equation with a different weight
// scheme: indicators of the original or perturbed level, columns of P^-1,
// model posteriors, or any of those scaled by resampling multipliers.

#ifndef PRAM_SOLVER_H_
#define PRAM_SOLVER_H_

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pram/core.h"

namespace pram {

enum class WeightProvenance {
  kInverseTransition,
  kIndicatorOriginal,
  kIndicatorPerturbed,
  kPosteriorModel,
  kResampled,
};

class WeightScheme {
 public:
  // `weights` is n x K row-major. Throws kInvalidArgument on non-finite
  // entries or a size that is not a multiple of `levels`.
  WeightScheme(WeightProvenance provenance, int levels,
               std::vector<double> weights);

  // Row i is column S*_i of Q2; each row sums to one.
  static WeightScheme InverseTransition(const Dataset& data,
                                        const ReversionMatrix& q);
  static WeightScheme IndicatorOriginal(const Dataset& data);
  static WeightScheme IndicatorPerturbed(const Dataset& data);

  // Row i scaled by multipliers[i]; provenance becomes kResampled.
  WeightScheme Scaled(std::span<const double> multipliers) const;
  WeightScheme Scaled(double alpha) const;

  WeightProvenance provenance() const { return provenance_; }
  std::size_t n() const { return weights_.size() / levels_; }
  int levels() const { return levels_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(weights_).subspan(i * levels_, levels_);
  }

 private:
  WeightProvenance provenance_;
  int levels_;
  std::vector<double> weights_;
};

enum class JacobianMode { kAnalytic, kFiniteDifference };

struct SolverConfig {
  // nullopt = AUTO: warm start from the indicator-perturbed solution when the
  // weights are signed, zeros otherwise.
  std::optional<Eigen::VectorXd> init;
  int max_iterations = 100;
  // On the max-norm of g.
  double tolerance = 1e-10;
  int max_halvings = 30;
  // kAnalytic falls back to finite differences when U has no Jacobian.
  JacobianMode jacobian_mode = JacobianMode::kAnalytic;
  // Central-difference step is fd_relative_step * (1 + |beta_j|).
  double fd_relative_step = 1e-6;

  void Validate() const;
};

struct SolveResult {
  Eigen::VectorXd beta;
  SolverDiagnostics diagnostics;
};

// Generic damped Newton for F(x) = 0. Newton systems are solved with
// diagonal damping lambda in {0, 1e-10, 1e-8, 1e-6, 1e-4} until the damped
// matrix is nonsingular; steps are halved until max|F| decreases.
// Exhausting the iteration or halving budget returns the best iterate with
// converged = false. Throws kSingularJacobian when no damping level works.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
SolveResult NewtonSolve(const ResidualFn& residual, const JacobianFn& jacobian,
                        const Eigen::VectorXd& init, const SolverConfig& cfg);

// Central-difference Jacobian of `residual` at x.
Eigen::MatrixXd FiniteDifferenceJacobian(const ResidualFn& residual,
                                         const Eigen::VectorXd& x,
                                         double relative_step);

// g(beta).
Eigen::VectorXd AverageEstimatingFunction(const Dataset& data,
                                          const EstimatingFunction& u,
                                          const WeightScheme& w,
                                          const Eigen::VectorXd& beta);

// (1/n) sum_i sum_k w_ik dU(k, record_i; beta)/dbeta^T.
Eigen::MatrixXd AverageJacobian(
    const Dataset& data, const EstimatingFunction& u, const WeightScheme& w,
    const Eigen::VectorXd& beta,
    JacobianMode mode = JacobianMode::kAnalytic, double fd_relative_step = 1e-6);

// Per-record phi_i = sum_k w_ik U(k, record_i; beta), as an n x d matrix.
Eigen::MatrixXd RecordContributions(const Dataset& data,
                                    const EstimatingFunction& u,
                                    const WeightScheme& w,
                                    const Eigen::VectorXd& beta);

// Solves g(beta) = 0. Throws kDimensionMismatch for inconsistent inputs,
// kInvalidArgument when n < d, and kSingularJacobian.
SolveResult Solve(const Dataset& data, const EstimatingFunction& u,
                  const WeightScheme& w, const SolverConfig& cfg);

}  // namespace pram

#endif  // PRAM_SOLVER_H_
