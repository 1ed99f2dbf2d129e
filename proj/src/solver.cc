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

#include "pram/solver.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace pram {
namespace {

constexpr double kDampingLevels[] = {0.0, 1e-10, 1e-8, 1e-6, 1e-4};
constexpr double kSingularRcond = 1e-14;

double MaxAbs(const Eigen::VectorXd& v) {
  if (!v.allFinite()) return std::numeric_limits<double>::infinity();
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double Condition(const Eigen::MatrixXd& j) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s(0) == 0.0 || s(s.size() - 1) == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return s(0) / s(s.size() - 1);
}

// Newton direction with Levenberg damping on the normal equations. Damping
// is scaled by the largest diagonal entry of J'J.
Eigen::VectorXd DampedDirection(const Eigen::MatrixXd& jac,
                                const Eigen::VectorXd& residual,
                                double condition) {
  if (jac.allFinite() && condition * kSingularRcond < 1.0) {
    Eigen::VectorXd step = jac.fullPivLu().solve(-residual);
    if (step.allFinite()) return step;
  }
  if (jac.allFinite()) {
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const double scale = std::max(1.0, normal.diagonal().maxCoeff());
    const int d = static_cast<int>(jac.cols());
    for (double lambda : kDampingLevels) {
      if (lambda == 0.0) continue;
      Eigen::MatrixXd damped =
          normal + lambda * scale * Eigen::MatrixXd::Identity(d, d);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
      Eigen::VectorXd step = ldlt.solve(-jac.transpose() * residual);
      if (step.allFinite() && Condition(damped) * kSingularRcond < 1.0) {
        return step;
      }
    }
  }
  std::ostringstream msg;
  msg << "Newton system is singular (condition number " << condition
      << ") even with damping up to 1e-4";
  throw Error(ErrorCode::kSingularJacobian, msg.str());
}

void CheckInputs(const Dataset& data, const EstimatingFunction& u,
                 const WeightScheme& w) {
  if (w.n() != data.n()) {
    std::ostringstream msg;
    msg << "weight scheme covers " << w.n() << " records, dataset has "
        << data.n();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  if (w.levels() != u.levels()) {
    std::ostringstream msg;
    msg << "weight scheme has K = " << w.levels()
        << ", estimating function has K = " << u.levels();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

void CheckBeta(const EstimatingFunction& u, const Eigen::VectorXd& beta) {
  if (beta.size() != u.dim()) {
    std::ostringstream msg;
    msg << "beta has " << beta.size() << " entries, estimating function has d = "
        << u.dim();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

}  // namespace

WeightScheme::WeightScheme(WeightProvenance provenance, int levels,
                           std::vector<double> weights)
    : provenance_(provenance), levels_(levels), weights_(std::move(weights)) {
  if (levels_ < 1 || weights_.size() % levels_ != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight vector size is not a multiple of K");
  }
  for (double v : weights_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be finite");
    }
  }
}

WeightScheme WeightScheme::InverseTransition(const Dataset& data,
                                             const ReversionMatrix& q) {
  if (q.k() != data.levels()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "reversion matrix and dataset disagree on K");
  }
  const int k = q.k();
  std::span<const int> observed = data.sensitive(SensitiveTag::kPerturbed);
  std::vector<double> weights(observed.size() * k);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    for (int level = 0; level < k; ++level) {
      weights[i * k + level] = q(level, observed[i]);
    }
  }
  return WeightScheme(WeightProvenance::kInverseTransition, k,
                      std::move(weights));
}

namespace {

WeightScheme Indicator(const Dataset& data, SensitiveTag tag,
                       WeightProvenance provenance) {
  const int k = data.levels();
  std::span<const int> levels = data.sensitive(tag);
  std::vector<double> weights(levels.size() * k, 0.0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    weights[i * k + levels[i]] = 1.0;
  }
  return WeightScheme(provenance, k, std::move(weights));
}

}  // namespace

WeightScheme WeightScheme::IndicatorOriginal(const Dataset& data) {
  return Indicator(data, SensitiveTag::kOriginal,
                   WeightProvenance::kIndicatorOriginal);
}

WeightScheme WeightScheme::IndicatorPerturbed(const Dataset& data) {
  return Indicator(data, SensitiveTag::kPerturbed,
                   WeightProvenance::kIndicatorPerturbed);
}

WeightScheme WeightScheme::Scaled(std::span<const double> multipliers) const {
  if (multipliers.size() != n()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "one multiplier per record is required");
  }
  std::vector<double> scaled = weights_;
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    for (int k = 0; k < levels_; ++k) scaled[i * levels_ + k] *= multipliers[i];
  }
  return WeightScheme(WeightProvenance::kResampled, levels_, std::move(scaled));
}

WeightScheme WeightScheme::Scaled(double alpha) const {
  std::vector<double> scaled = weights_;
  for (double& v : scaled) v *= alpha;
  return WeightScheme(WeightProvenance::kResampled, levels_, std::move(scaled));
}

void SolverConfig::Validate() const {
  if (!(tolerance > 0.0) || max_iterations < 1 || max_halvings < 0 ||
      !(fd_relative_step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "solver needs tolerance > 0, max_iterations >= 1, "
                "max_halvings >= 0 and a positive finite-difference step");
  }
}

Eigen::MatrixXd FiniteDifferenceJacobian(const ResidualFn& residual,
                                         const Eigen::VectorXd& x,
                                         double relative_step) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = relative_step * (1.0 + std::abs(x(j)));
    Eigen::VectorXd plus = x;
    Eigen::VectorXd minus = x;
    plus(j) += h;
    minus(j) -= h;
    Eigen::VectorXd column = (residual(plus) - residual(minus)) / (2.0 * h);
    if (j == 0) jac.resize(column.size(), d);
    jac.col(j) = column;
  }
  return jac;
}

SolveResult NewtonSolve(const ResidualFn& residual, const JacobianFn& jacobian,
                        const Eigen::VectorXd& init, const SolverConfig& cfg) {
  cfg.Validate();
  SolveResult result;
  Eigen::VectorXd x = init;
  Eigen::VectorXd f = residual(x);
  double norm = MaxAbs(f);
  int iterations = 0;
  double condition = 0.0;

  while (norm >= cfg.tolerance && iterations < cfg.max_iterations) {
    if (!std::isfinite(norm)) break;
    const Eigen::MatrixXd jac = jacobian(x);
    condition = Condition(jac);
    const Eigen::VectorXd direction = DampedDirection(jac, f, condition);

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
      Eigen::VectorXd trial = x + t * direction;
      Eigen::VectorXd trial_f = residual(trial);
      const double trial_norm = MaxAbs(trial_f);
      if (trial_norm < norm) {
        x = std::move(trial);
        f = std::move(trial_f);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++iterations;
  }

  result.beta = x;
  result.diagnostics.iterations = iterations;
  result.diagnostics.residual_norm = norm;
  result.diagnostics.converged = norm < cfg.tolerance;
  result.diagnostics.jacobian_condition =
      condition > 0.0 ? condition : Condition(jacobian(x));
  return result;
}

Eigen::VectorXd AverageEstimatingFunction(const Dataset& data,
                                          const EstimatingFunction& u,
                                          const WeightScheme& w,
                                          const Eigen::VectorXd& beta) {
  CheckInputs(data, u, w);
  CheckBeta(u, beta);
  const int d = u.dim();
  const int k = w.levels();
  std::vector<double> value(d);
  std::vector<double> total(d, 0.0);
  std::span<const double> b(beta.data(), beta.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Record record{&data, i};
    std::span<const double> weights = w.row(i);
    for (int level = 0; level < k; ++level) {
      const double wk = weights[level];
      if (wk == 0.0) continue;
      u.Value(record, level, b, value);
      for (int a = 0; a < d; ++a) total[a] += wk * value[a];
    }
  }
  Eigen::VectorXd g(d);
  for (int a = 0; a < d; ++a) g(a) = total[a] / static_cast<double>(data.n());
  return g;
}

Eigen::MatrixXd AverageJacobian(const Dataset& data,
                                const EstimatingFunction& u,
                                const WeightScheme& w,
                                const Eigen::VectorXd& beta, JacobianMode mode,
                                double fd_relative_step) {
  CheckInputs(data, u, w);
  CheckBeta(u, beta);
  if (mode == JacobianMode::kFiniteDifference || !u.has_jacobian()) {
    return FiniteDifferenceJacobian(
        [&](const Eigen::VectorXd& b) {
          return AverageEstimatingFunction(data, u, w, b);
        },
        beta, fd_relative_step);
  }
  const int d = u.dim();
  const int k = w.levels();
  std::vector<double> value(d * d);
  std::vector<double> total(d * d, 0.0);
  std::span<const double> b(beta.data(), beta.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Record record{&data, i};
    std::span<const double> weights = w.row(i);
    for (int level = 0; level < k; ++level) {
      const double wk = weights[level];
      if (wk == 0.0) continue;
      u.Jacobian(record, level, b, value);
      for (int a = 0; a < d * d; ++a) total[a] += wk * value[a];
    }
  }
  Eigen::MatrixXd jac(d, d);
  for (int a = 0; a < d; ++a) {
    for (int c = 0; c < d; ++c) {
      jac(a, c) = total[a * d + c] / static_cast<double>(data.n());
    }
  }
  return jac;
}

Eigen::MatrixXd RecordContributions(const Dataset& data,
                                    const EstimatingFunction& u,
                                    const WeightScheme& w,
                                    const Eigen::VectorXd& beta) {
  CheckInputs(data, u, w);
  CheckBeta(u, beta);
  const int d = u.dim();
  const int k = w.levels();
  std::vector<double> value(d);
  std::span<const double> b(beta.data(), beta.size());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(data.n(), d);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Record record{&data, i};
    std::span<const double> weights = w.row(i);
    for (int level = 0; level < k; ++level) {
      const double wk = weights[level];
      if (wk == 0.0) continue;
      u.Value(record, level, b, value);
      for (int a = 0; a < d; ++a) phi(i, a) += wk * value[a];
    }
  }
  return phi;
}

SolveResult Solve(const Dataset& data, const EstimatingFunction& u,
                  const WeightScheme& w, const SolverConfig& cfg) {
  cfg.Validate();
  CheckInputs(data, u, w);
  const int d = u.dim();
  if (data.n() < static_cast<std::size_t>(d)) {
    std::ostringstream msg;
    msg << "need at least d = " << d << " records, got " << data.n();
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }

  Eigen::VectorXd init = Eigen::VectorXd::Zero(d);
  if (cfg.init) {
    init = *cfg.init;
    CheckBeta(u, init);
  } else {
    const bool indicator =
        w.provenance() == WeightProvenance::kIndicatorOriginal ||
        w.provenance() == WeightProvenance::kIndicatorPerturbed;
    if (!indicator && data.has(SensitiveTag::kPerturbed)) {
      SolverConfig naive_cfg = cfg;
      naive_cfg.init = Eigen::VectorXd::Zero(d);
      try {
        SolveResult naive =
            Solve(data, u, WeightScheme::IndicatorPerturbed(data), naive_cfg);
        if (naive.beta.allFinite()) init = naive.beta;
      } catch (const Error&) {
        // Cold start from zero instead.
      }
    }
  }

  const bool analytic =
      cfg.jacobian_mode == JacobianMode::kAnalytic && u.has_jacobian();
  return NewtonSolve(
      [&](const Eigen::VectorXd& b) {
        return AverageEstimatingFunction(data, u, w, b);
      },
      [&](const Eigen::VectorXd& b) {
        return AverageJacobian(data, u, w, b,
                               analytic ? JacobianMode::kAnalytic
                                        : JacobianMode::kFiniteDifference,
                               cfg.fd_relative_step);
      },
      init, cfg);
}

}  // namespace pram
