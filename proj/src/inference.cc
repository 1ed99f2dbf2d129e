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

#include "pram/inference.h"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "pram/parallel.h"
#include "pram/random.h"

namespace pram {
namespace {

constexpr double kMaxOmegaCondition = 1e10;

Eigen::MatrixXd InvertOmega(const Eigen::MatrixXd& omega) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(omega);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  const double condition =
      smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxOmegaCondition)) {
    std::ostringstream msg;
    msg << "average Jacobian has condition number " << condition;
    throw Error(ErrorCode::kSingularOmega, msg.str());
  }
  return omega.inverse();
}

Eigen::MatrixXd Sandwich(const Eigen::MatrixXd& omega_inverse,
                         const Eigen::MatrixXd& contributions) {
  const double n = static_cast<double>(contributions.rows());
  const Eigen::MatrixXd meat = contributions.transpose() * contributions / n;
  const Eigen::MatrixXd cov =
      omega_inverse * meat * omega_inverse.transpose() / n;
  return 0.5 * (cov + cov.transpose());
}

double Multiplier(MultiplierLaw law, const RandomStream& stream,
                  std::uint64_t counter) {
  switch (law) {
    case MultiplierLaw::kExponential:
      return stream.Exponential(counter);
    case MultiplierLaw::kTwoPoint:
      return (stream.Bits(counter) >> 63) ? 2.0 : 0.0;
    case MultiplierLaw::kConstantOneTestOnly:
      return 1.0;
  }
  return 1.0;
}

void CheckLevel(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "confidence level must lie in (0, 1)");
  }
}

}  // namespace

void ResampleConfig::Validate() const {
  if (resamples < 50) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 50 resamples");
  }
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_failure_fraction must lie in [0, 1)");
  }
}

double DrawMultiplier(const ResampleConfig& cfg, std::uint64_t resample,
                      std::uint64_t record) {
  return Multiplier(cfg.law, RandomStream(cfg.seed).Substream(resample),
                    record);
}

ResampleOutcome ResampleVariance(const Dataset& data,
                                 const EstimatingFunction& u,
                                 const WeightScheme& weights,
                                 const Eigen::VectorXd& beta_hat,
                                 const ResampleConfig& cfg,
                                 const SolverConfig& solver_cfg) {
  cfg.Validate();
  if (beta_hat.size() != u.dim() || !beta_hat.allFinite()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "beta_hat does not match the estimating function");
  }
  const std::size_t n = data.n();
  const int d = u.dim();
  SolverConfig resample_cfg = solver_cfg;
  resample_cfg.init = beta_hat;

  std::vector<std::optional<Eigen::VectorXd>> draws(cfg.resamples);
  ParallelFor(cfg.resamples, [&](std::size_t m) {
    const RandomStream stream = RandomStream(cfg.seed).Substream(m);
    std::vector<double> multipliers(n);
    for (std::size_t i = 0; i < n; ++i) {
      multipliers[i] = Multiplier(cfg.law, stream, i);
    }
    try {
      SolveResult solved =
          Solve(data, u, weights.Scaled(multipliers), resample_cfg);
      if (solved.diagnostics.converged && solved.beta.allFinite()) {
        draws[m] = std::move(solved.beta);
      }
    } catch (const Error&) {
      // Counted as a failure below.
    }
  });

  ResampleOutcome outcome;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& draw : draws) {
    if (!draw) {
      ++outcome.failures;
      continue;
    }
    ++outcome.used;
    mean += *draw;
  }
  if (outcome.failures > cfg.max_failure_fraction * cfg.resamples ||
      outcome.used < 2) {
    std::ostringstream msg;
    msg << outcome.failures << " of " << cfg.resamples
        << " resamples failed to converge";
    throw Error(ErrorCode::kTooManyFailures, msg.str());
  }
  mean /= outcome.used;
  outcome.covariance = Eigen::MatrixXd::Zero(d, d);
  for (const auto& draw : draws) {
    if (!draw) continue;
    const Eigen::VectorXd centered = *draw - mean;
    outcome.covariance += centered * centered.transpose();
  }
  outcome.covariance /= outcome.used - 1;
  return outcome;
}

ResampleOutcome ResampleVariance(const Dataset& data, const TransitionMatrix& p,
                                 const EstimatingFunction& u,
                                 const Eigen::VectorXd& beta_hat,
                                 const ResampleConfig& cfg,
                                 const SolverConfig& solver_cfg) {
  const ReversionMatrix q = InvertTransition(p);
  return ResampleVariance(data, u, WeightScheme::InverseTransition(data, q),
                          beta_hat, cfg, solver_cfg);
}

Eigen::MatrixXd PluginVariance(const Dataset& data, const EstimatingFunction& u,
                               const WeightScheme& weights,
                               const Eigen::VectorXd& beta_hat,
                               const SolverConfig& solver_cfg) {
  const Eigen::MatrixXd omega =
      AverageJacobian(data, u, weights, beta_hat, solver_cfg.jacobian_mode,
                      solver_cfg.fd_relative_step);
  return Sandwich(InvertOmega(omega),
                  RecordContributions(data, u, weights, beta_hat));
}

Eigen::MatrixXd PluginVariance(const Dataset& data, const TransitionMatrix& p,
                               const EstimatingFunction& u,
                               const Eigen::VectorXd& beta_hat,
                               const SolverConfig& solver_cfg) {
  const ReversionMatrix q = InvertTransition(p);
  return PluginVariance(data, u, WeightScheme::InverseTransition(data, q),
                        beta_hat, solver_cfg);
}

EfficiencyLoss EfficiencyLossDecomposition(const Dataset& data,
                                           const TransitionMatrix& p,
                                           const EstimatingFunction& u,
                                           const Eigen::VectorXd& beta) {
  const ReversionMatrix q = InvertTransition(p);
  const WeightScheme inverse = WeightScheme::InverseTransition(data, q);
  const WeightScheme original = WeightScheme::IndicatorOriginal(data);
  const Eigen::MatrixXd omega_inverse =
      InvertOmega(AverageJacobian(data, u, inverse, beta));
  const Eigen::MatrixXd phi = RecordContributions(data, u, inverse, beta);
  const Eigen::MatrixXd plain = RecordContributions(data, u, original, beta);
  EfficiencyLoss result;
  result.proposed = Sandwich(omega_inverse, phi);
  result.oracle = Sandwich(omega_inverse, plain);
  result.loss = Sandwich(omega_inverse, phi - plain);
  return result;
}

double NormalQuantile(double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "normal quantile needs a probability in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               probability);
}

void ConfidenceIntervals(EstimateResult& result, double level) {
  CheckLevel(level);
  if (!result.covariance) {
    throw Error(ErrorCode::kInvalidArgument,
                "confidence intervals need a covariance estimate");
  }
  const Eigen::MatrixXd& cov = *result.covariance;
  const int d = static_cast<int>(result.beta_hat.size());
  if (cov.rows() != d || cov.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "covariance does not match beta_hat");
  }
  const double z = NormalQuantile(0.5 * (1.0 + level));
  result.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  result.ci_lower = result.beta_hat - z * result.std_errors;
  result.ci_upper = result.beta_hat + z * result.std_errors;
  result.ci_level = level;
}

void AttachCovariance(EstimateResult& result, const Eigen::MatrixXd& covariance,
                      double level) {
  result.covariance = 0.5 * (covariance + covariance.transpose());
  ConfidenceIntervals(result, level);
}

}  // namespace pram
