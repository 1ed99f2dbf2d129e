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

#include "pram/mechanism.h"

#include <algorithm>
#include <functional>
#include <sstream>

#include "pram/parallel.h"
#include "pram/random.h"

namespace pram {
namespace {

constexpr std::size_t kPerturbBlock = 8192;

}  // namespace

std::vector<int> PerturbLevels(std::span<const int> original,
                               const TransitionMatrix& p, std::uint64_t seed) {
  const int k = p.k();
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (original[i] < 0 || original[i] >= k) {
      std::ostringstream msg;
      msg << "level " << original[i] << " at row " << i << " is outside 0.."
          << k - 1;
      throw Error(ErrorCode::kLevelOutOfRange, msg.str());
    }
  }

  // Cumulative column sums, so a draw is a search along one column.
  Eigen::MatrixXd cumulative = p.entries();
  for (int j = 0; j < k; ++j) {
    for (int i = 1; i < k; ++i) cumulative(i, j) += cumulative(i - 1, j);
  }

  const RandomStream stream(seed);
  std::vector<int> perturbed(original.size());
  const std::size_t blocks = (original.size() + kPerturbBlock - 1) / kPerturbBlock;
  ParallelFor(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(original.size(), (b + 1) * kPerturbBlock);
    for (std::size_t i = b * kPerturbBlock; i < end; ++i) {
      const int s = original[i];
      const double u = stream.Uniform(i);
      int level = k - 1;
      for (int j = 0; j < k - 1; ++j) {
        if (u < cumulative(j, s)) {
          level = j;
          break;
        }
      }
      // Zero-probability levels are never drawn, including on the fallback.
      while (level > 0 && p(level, s) == 0.0) --level;
      perturbed[i] = level;
    }
  });
  return perturbed;
}

Dataset Perturb(const Dataset& data, const TransitionMatrix& p,
                std::uint64_t seed, PerturbationRecord* record) {
  if (p.k() != data.levels()) {
    std::ostringstream msg;
    msg << "transition matrix has K = " << p.k() << " but '"
        << data.sensitive_name() << "' has " << data.levels() << " levels";
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  std::span<const int> original = data.sensitive(SensitiveTag::kOriginal);
  std::vector<int> perturbed = PerturbLevels(original, p, seed);
  if (record != nullptr) {
    record->seed = seed;
    record->draws.clear();
    record->draws.reserve(original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
      record->draws.emplace_back(original[i], perturbed[i]);
    }
  }
  Dataset out = data;
  out.SetSensitive(SensitiveTag::kPerturbed, std::move(perturbed));
  return out;
}

FrequencyVector EmpiricalFrequencies(std::span<const int> levels, int k) {
  if (levels.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no records to count");
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (int level : levels) {
    if (level < 0 || level >= k) {
      throw Error(ErrorCode::kLevelOutOfRange, "level outside 0..K-1");
    }
    counts(level) += 1.0;
  }
  return FrequencyVector(counts / static_cast<double>(levels.size()),
                         FrequencyTag::kProper);
}

FrequencyVector RecoverFrequencies(const FrequencyVector& observed,
                                   const ReversionMatrix& q) {
  if (observed.k() != q.k()) {
    std::ostringstream msg;
    msg << "observed frequencies have K = " << observed.k()
        << ", reversion matrix has K = " << q.k();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  return FrequencyVector(q.entries() * observed.probs(),
                         FrequencyTag::kRawRecovered);
}

FrequencyVector ProjectToSimplex(const FrequencyVector& v) {
  // Sort-based projection (Held, Wolfe and Crowder).
  std::vector<double> sorted(v.probs().data(), v.probs().data() + v.k());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (int i = 0; i < v.k(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / (i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  Eigen::VectorXd projected = (v.probs().array() - theta).max(0.0).matrix();
  projected /= projected.sum();
  return FrequencyVector(projected, FrequencyTag::kProper);
}

namespace diagnostics {

Eigen::MatrixXd ReversionProbabilistic(const TransitionMatrix& p,
                                       const FrequencyVector& prior) {
  const int k = p.k();
  if (prior.k() != k) {
    throw Error(ErrorCode::kDimensionMismatch,
                "prior and transition matrix disagree on K");
  }
  if (prior.probs().minCoeff() <= 0.0) {
    throw Error(ErrorCode::kZeroMarginal,
                "reversion by Bayes rule needs strictly positive marginals");
  }
  Eigen::MatrixXd q1(k, k);
  for (int j = 0; j < k; ++j) {
    double normalizer = 0.0;
    for (int b = 0; b < k; ++b) normalizer += p(j, b) * prior[b];
    if (normalizer <= 0.0) {
      std::ostringstream msg;
      msg << "perturbed level " << j << " has zero probability";
      throw Error(ErrorCode::kZeroMarginal, msg.str());
    }
    for (int a = 0; a < k; ++a) q1(a, j) = p(j, a) * prior[a] / normalizer;
  }
  return q1;
}

}  // namespace diagnostics
}  // namespace pram
