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

#include "pram/model_dependent.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "pram/estfun.h"
#include "pram/estimators.h"

namespace pram {
namespace {

constexpr double kProbabilityFloor = 1e-15;
constexpr double kPinned = 1e-9;

bool IsProbit(LatentFamily family) {
  return family == LatentFamily::kProbit ||
         family == LatentFamily::kProbitNoIntercept;
}

double Link(LatentFamily family, double eta) {
  return IsProbit(family) ? NormalCdf(eta) : Expit(eta);
}

double LinkDerivative(LatentFamily family, double eta) {
  if (IsProbit(family)) {
    return std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * std::numbers::pi);
  }
  const double m = Expit(eta);
  return m * (1.0 - m);
}

}  // namespace

std::string_view LatentFamilyName(LatentFamily family) {
  switch (family) {
    case LatentFamily::kLogistic: return "logistic";
    case LatentFamily::kLogisticNoIntercept: return "logistic-no-intercept";
    case LatentFamily::kProbit: return "probit";
    case LatentFamily::kProbitNoIntercept: return "probit-no-intercept";
  }
  return "unknown";
}

std::optional<LatentFamily> ParseLatentFamily(std::string_view name) {
  for (LatentFamily f :
       {LatentFamily::kLogistic, LatentFamily::kLogisticNoIntercept,
        LatentFamily::kProbit, LatentFamily::kProbitNoIntercept}) {
    if (LatentFamilyName(f) == name) return f;
  }
  return std::nullopt;
}

std::string_view LatentTargetName(LatentTarget target) {
  return target == LatentTarget::kLatent ? "latent" : "observed";
}

std::optional<LatentTarget> ParseLatentTarget(std::string_view name) {
  if (name == "latent") return LatentTarget::kLatent;
  if (name == "observed") return LatentTarget::kObserved;
  return std::nullopt;
}

bool HasIntercept(LatentFamily family) {
  return family == LatentFamily::kLogistic || family == LatentFamily::kProbit;
}

LatentFamily WithoutIntercept(LatentFamily family) {
  return IsProbit(family) ? LatentFamily::kProbitNoIntercept
                          : LatentFamily::kLogisticNoIntercept;
}

double NormalCdf(double v) { return 0.5 * std::erfc(-v / std::numbers::sqrt2); }

ModelDependentFit::ModelDependentFit(LatentModelSpec spec, TransitionMatrix p,
                                     std::vector<std::size_t> columns)
    : spec_(std::move(spec)), p_(std::move(p)), columns_(std::move(columns)) {
  q_ = p_.entries().inverse();
}

double ModelDependentFit::LinearPredictor(const Record& record) const {
  std::size_t j = 0;
  double eta = 0.0;
  if (HasIntercept(spec_.family)) eta += theta_(j++);
  for (std::size_t c : columns_) eta += theta_(j++) * record[c];
  return eta;
}

Eigen::Vector2d ModelDependentFit::LatentProbabilities(
    const Record& record) const {
  const double f = Link(spec_.family, LinearPredictor(record));
  Eigen::Vector2d modeled(1.0 - f, f);
  if (spec_.target == LatentTarget::kLatent) return modeled;
  Eigen::Vector2d latent = (q_ * modeled).cwiseMax(0.0).cwiseMin(1.0);
  return latent / latent.sum();
}

Eigen::Vector2d ModelDependentFit::ObservedProbabilities(
    const Record& record) const {
  return p_.entries() * LatentProbabilities(record);
}

FrequencyVector ModelDependentFit::Posterior(const Record& record,
                                             int observed_level) const {
  const Eigen::Vector2d latent = LatentProbabilities(record);
  Eigen::VectorXd joint(2);
  for (int k = 0; k < 2; ++k) joint(k) = p_(observed_level, k) * latent(k);
  const double total = joint.sum();
  if (!(total > 0.0)) {
    std::ostringstream msg;
    msg << "observed level " << observed_level
        << " has zero probability under the fitted model at row "
        << record.row;
    throw Error(ErrorCode::kDegenerateModel, msg.str());
  }
  return FrequencyVector(joint / total, FrequencyTag::kProper);
}

ModelDependentFit FitLatentModel(const Dataset& data, const TransitionMatrix& p,
                                 const LatentModelSpec& spec,
                                 const SolverConfig& cfg) {
  if (p.k() != 2 || data.levels() != 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "binary latent models need a two-level sensitive variable");
  }
  std::vector<std::size_t> columns;
  for (const auto& name : spec.covariates) {
    if (name == data.sensitive_name()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "the sensitive variable cannot explain itself");
    }
    columns.push_back(data.ColumnIndex(name));
  }
  const int dim =
      static_cast<int>(columns.size()) + (HasIntercept(spec.family) ? 1 : 0);
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "latent model without intercept needs covariates");
  }
  std::span<const int> observed = data.sensitive(SensitiveTag::kPerturbed);
  const std::size_t n = data.n();

  // Design rows are materialized once; the fit touches them many times.
  Eigen::MatrixXd z(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    int j = 0;
    if (HasIntercept(spec.family)) z(i, j++) = 1.0;
    for (std::size_t c : columns) z(i, j++) = data.value(c, i);
  }
  // p*(1 | z) = offset + slope * F(eta).
  double offset = 0.0;
  double slope = 1.0;
  if (spec.target == LatentTarget::kLatent) {
    offset = p(1, 0);
    slope = p(1, 1) - p(1, 0);
  }
  const LatentFamily family = spec.family;

  auto score = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = z * theta;
    Eigen::VectorXd weights(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double pstar = std::clamp(offset + slope * Link(family, eta(i)),
                                      kProbabilityFloor, 1.0 - kProbabilityFloor);
      weights(i) = (observed[i] - pstar) / (pstar * (1.0 - pstar)) * slope *
                   LinkDerivative(family, eta(i));
    }
    return Eigen::VectorXd(z.transpose() * weights / static_cast<double>(n));
  };
  auto log_likelihood = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = z * theta;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pstar = std::clamp(offset + slope * Link(family, eta(i)),
                                      kProbabilityFloor, 1.0 - kProbabilityFloor);
      total += std::log(observed[i] == 1 ? pstar : 1.0 - pstar);
    }
    return total;
  };
  JacobianFn hessian;
  if (spec.target == LatentTarget::kObserved && !IsProbit(family)) {
    // Ordinary logistic regression.
    hessian = [&](const Eigen::VectorXd& theta) {
      const Eigen::VectorXd eta = z * theta;
      Eigen::VectorXd w(n);
      for (std::size_t i = 0; i < n; ++i) w(i) = LinkDerivative(family, eta(i));
      return Eigen::MatrixXd(-(z.transpose() * w.asDiagonal() * z) /
                             static_cast<double>(n));
    };
  } else {
    hessian = [&](const Eigen::VectorXd& theta) {
      Eigen::MatrixXd h =
          FiniteDifferenceJacobian(score, theta, cfg.fd_relative_step);
      return Eigen::MatrixXd(0.5 * (h + h.transpose()));
    };
  }

  SolverConfig fit_cfg = cfg;
  fit_cfg.init.reset();
  const Eigen::VectorXd init = cfg.init && cfg.init->size() == dim
                                   ? *cfg.init
                                   : Eigen::VectorXd::Zero(dim);
  SolveResult solved = NewtonSolve(score, hessian, init, fit_cfg);

  ModelDependentFit fit(spec, p, std::move(columns));
  fit.theta_ = solved.beta;
  fit.converged_ = solved.diagnostics.converged;
  fit.iterations_ = solved.diagnostics.iterations;
  if (!fit.theta_.allFinite()) {
    throw Error(ErrorCode::kDegenerateModel, "latent model diverged");
  }
  fit.log_likelihood_ = log_likelihood(fit.theta_);

  bool all_pinned = true;
  const Eigen::VectorXd eta = z * fit.theta_;
  for (std::size_t i = 0; i < n && all_pinned; ++i) {
    const double f = Link(family, eta(i));
    all_pinned = f < kPinned || f > 1.0 - kPinned;
  }
  if (all_pinned) {
    throw Error(ErrorCode::kDegenerateModel,
                "every fitted probability is pinned at 0 or 1");
  }
  return fit;
}

WeightScheme PosteriorWeights(const Dataset& data,
                              const ModelDependentFit& fit) {
  std::span<const int> observed = data.sensitive(SensitiveTag::kPerturbed);
  std::vector<double> weights(2 * data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const FrequencyVector posterior =
        fit.Posterior(Record{&data, i}, observed[i]);
    weights[2 * i] = posterior[0];
    weights[2 * i + 1] = posterior[1];
  }
  return WeightScheme(WeightProvenance::kPosteriorModel, 2, std::move(weights));
}

EstimateResult ModelDependentEstimate(const Dataset& data,
                                      const TransitionMatrix& p,
                                      const EstimatingFunction& u,
                                      const ModelDependentFit& fit,
                                      const SolverConfig& cfg, Method method) {
  if (!fit.converged()) {
    throw Error(ErrorCode::kNoConvergence,
                "latent model fit did not converge");
  }
  if (p.k() != u.levels()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "transition matrix and estimating function disagree on K");
  }
  return EstimateWithWeights(data, u, PosteriorWeights(data, fit), cfg, method);
}

}  // namespace pram
