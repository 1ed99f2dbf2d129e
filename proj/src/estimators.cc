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

#include "pram/estimators.h"

#include <sstream>

namespace pram {

EstimateResult EstimateWithWeights(const Dataset& data,
                                   const EstimatingFunction& u,
                                   const WeightScheme& weights,
                                   const SolverConfig& cfg, Method method) {
  SolveResult solved = Solve(data, u, weights, cfg);
  EstimateResult result;
  result.method = method;
  result.beta_hat = solved.beta;
  result.diagnostics = solved.diagnostics;
  result.influence = RecordContributions(data, u, weights, solved.beta);
  return result;
}

EstimateResult ProposedEstimate(const Dataset& data, const TransitionMatrix& p,
                                const EstimatingFunction& u,
                                const SolverConfig& cfg) {
  if (p.k() != data.levels() || p.k() != u.levels()) {
    std::ostringstream msg;
    msg << "transition matrix has K = " << p.k() << ", data has "
        << data.levels() << " levels, estimating function has " << u.levels();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  const ReversionMatrix q = InvertTransition(p);
  return EstimateWithWeights(data, u, WeightScheme::InverseTransition(data, q),
                             cfg, Method::kProposed);
}

EstimateResult OracleEstimate(const Dataset& data, const EstimatingFunction& u,
                              const SolverConfig& cfg) {
  return EstimateWithWeights(data, u, WeightScheme::IndicatorOriginal(data),
                             cfg, Method::kOracle);
}

EstimateResult NaiveEstimate(const Dataset& data, const EstimatingFunction& u,
                             const SolverConfig& cfg) {
  return EstimateWithWeights(data, u, WeightScheme::IndicatorPerturbed(data),
                             cfg, Method::kNaive);
}

}  // namespace pram
