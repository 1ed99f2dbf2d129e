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

// The post-randomization mechanism and marginal frequency recovery.

#ifndef PRAM_MECHANISM_H_
#define PRAM_MECHANISM_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pram/core.h"

namespace pram {

struct PerturbationRecord {
  std::uint64_t seed = 0;
  // (original, perturbed) per record; filled only when requested.
  std::vector<std::pair<int, int>> draws;
};

// Draws S*_i from column S_i of `p`. Record i uses draw i of the stream keyed
// by `seed`, so the output does not depend on how records are scheduled.
// Throws kLevelOutOfRange for levels outside 0..K-1.
std::vector<int> PerturbLevels(std::span<const int> original,
                               const TransitionMatrix& p, std::uint64_t seed);

// Returns a copy of `data` with its perturbed sensitive column set from the
// original one. Covariates are untouched.
Dataset Perturb(const Dataset& data, const TransitionMatrix& p,
                std::uint64_t seed, PerturbationRecord* record = nullptr);

// Empirical level frequencies of `levels` over 0..k-1.
FrequencyVector EmpiricalFrequencies(std::span<const int> levels, int k);

// Q2 * observed, tagged raw. The result sums to one but may leave the
// simplex; check outside_simplex(). Throws kDimensionMismatch.
FrequencyVector RecoverFrequencies(const FrequencyVector& observed,
                                   const ReversionMatrix& q);

// Euclidean projection onto the probability simplex.
FrequencyVector ProjectToSimplex(const FrequencyVector& v);

namespace diagnostics {

// Bayes reversion matrix Q1: entry (a, j) = P(j, a) prior_a / sum_b P(j, b)
// prior_b. When `prior` is the true-level marginal, column j is the
// posterior of S given S* = j. Not used by any estimator.
// Throws kZeroMarginal when a prior entry or a normalizer is zero.
Eigen::MatrixXd ReversionProbabilistic(const TransitionMatrix& p,
                                       const FrequencyVector& prior);

}  // namespace diagnostics
}  // namespace pram

#endif  // PRAM_MECHANISM_H_
