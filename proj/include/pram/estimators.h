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

#ifndef PRAM_ESTIMATORS_H_
#define PRAM_ESTIMATORS_H_

#include "pram/core.h"
#include "pram/solver.h"

namespace pram {

// Solves the estimating equation with the given weights and stores the
// per-record contributions at the root in result.influence. A solver that
// runs out of budget yields diagnostics.converged == false, not an error.
EstimateResult EstimateWithWeights(const Dataset& data,
                                   const EstimatingFunction& u,
                                   const WeightScheme& weights,
                                   const SolverConfig& cfg, Method method);

// Model-free estimator on perturbed data: each record contributes
// phi(s*, x; beta) = sum_k U(k, x; beta) q_{k, s*}, with q the entries of
// P^-1. Throws kIllConditioned if P cannot be inverted stably.
EstimateResult ProposedEstimate(const Dataset& data, const TransitionMatrix& p,
                                const EstimatingFunction& u,
                                const SolverConfig& cfg = {});

// Uses the original sensitive values; only possible where they are held.
EstimateResult OracleEstimate(const Dataset& data, const EstimatingFunction& u,
                              const SolverConfig& cfg = {});

// Treats perturbed values as if they were the original ones.
EstimateResult NaiveEstimate(const Dataset& data, const EstimatingFunction& u,
                             const SolverConfig& cfg = {});

}  // namespace pram

#endif  // PRAM_ESTIMATORS_H_
