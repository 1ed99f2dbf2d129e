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

// Model-dependent comparison estimators.
//
// A parametric binary-response model describes how the sensitive variable S
// depends on the other variables Z. It is fitted by maximizing the observed
// likelihood
//
//   sum_i log sum_k P(s*_i | k) p(k | z_i; theta),
//
// i.e. the parametric latent conditional pushed through the known mixing
// relation. Bayes' rule then gives p(s | s*, z), and the estimator solves
// (1/n) sum_i sum_k U(k, x_i; beta) p(k | s*_i, z_i) = 0.
//
// Two parametrizations of p(s | z; theta) are available:
//   kLatent    p(S = 1 | z) = F(theta' z)
//   kObserved  p(S* = 1 | z) = F(theta' z); the latent conditional is its
//              image under P^-1, clipped to the simplex.
// F is the logistic or normal CDF.

#ifndef PRAM_MODEL_DEPENDENT_H_
#define PRAM_MODEL_DEPENDENT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pram/core.h"
#include "pram/solver.h"

namespace pram {

enum class LatentFamily {
  kLogistic,
  kLogisticNoIntercept,
  kProbit,
  kProbitNoIntercept,
};

enum class LatentTarget { kLatent, kObserved };

std::string_view LatentTargetName(LatentTarget target);
std::optional<LatentTarget> ParseLatentTarget(std::string_view name);

std::string_view LatentFamilyName(LatentFamily family);
std::optional<LatentFamily> ParseLatentFamily(std::string_view name);
bool HasIntercept(LatentFamily family);
LatentFamily WithoutIntercept(LatentFamily family);

struct LatentModelSpec {
  LatentFamily family = LatentFamily::kLogistic;
  // Numeric columns the sensitive variable is regressed on.
  std::vector<std::string> covariates;
  LatentTarget target = LatentTarget::kObserved;
};

// Normal CDF via erfc.
double NormalCdf(double v);

class ModelDependentFit {
 public:
  const LatentModelSpec& spec() const { return spec_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  double log_likelihood() const { return log_likelihood_; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }

  // p(S = k | z) for k = 0, 1.
  Eigen::Vector2d LatentProbabilities(const Record& record) const;
  // Model-implied p(S* = j | z) = sum_k P(j | k) p(S = k | z).
  Eigen::Vector2d ObservedProbabilities(const Record& record) const;
  // p(S = . | S* = observed_level, z). Throws kDegenerateModel if the
  // observed level has zero model probability.
  FrequencyVector Posterior(const Record& record, int observed_level) const;

 private:
  friend ModelDependentFit FitLatentModel(const Dataset&,
                                          const TransitionMatrix&,
                                          const LatentModelSpec&,
                                          const SolverConfig&);
  ModelDependentFit(LatentModelSpec spec, TransitionMatrix p,
                    std::vector<std::size_t> columns);

  double LinearPredictor(const Record& record) const;

  LatentModelSpec spec_;
  TransitionMatrix p_;
  Eigen::Matrix2d q_;
  std::vector<std::size_t> columns_;
  Eigen::VectorXd theta_;
  double log_likelihood_ = 0.0;
  bool converged_ = false;
  int iterations_ = 0;
};

// Requires K = 2 and a perturbed sensitive column. Throws kDegenerateModel
// when every fitted probability is pinned at 0 or 1 or theta is not finite.
// Non-convergence is reported through converged().
ModelDependentFit FitLatentModel(const Dataset& data, const TransitionMatrix& p,
                                 const LatentModelSpec& spec,
                                 const SolverConfig& cfg = {});

// Posterior weights p(k | s*_i, z_i) for every record.
WeightScheme PosteriorWeights(const Dataset& data, const ModelDependentFit& fit);

// Throws kNoConvergence when the fit did not converge.
EstimateResult ModelDependentEstimate(const Dataset& data,
                                      const TransitionMatrix& p,
                                      const EstimatingFunction& u,
                                      const ModelDependentFit& fit,
                                      const SolverConfig& cfg = {},
                                      Method method = Method::kModel1);

}  // namespace pram

#endif  // PRAM_MODEL_DEPENDENT_H_
