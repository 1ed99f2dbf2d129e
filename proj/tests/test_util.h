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


// Helpers shared by the test binaries.

#ifndef PRAM_TESTS_TEST_UTIL_H_
#define PRAM_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pram/core.h"
#include "pram/estfun.h"

namespace pram::testing {

inline const Eigen::MatrixXd& ExampleMatrix() {
  static const Eigen::MatrixXd m = (Eigen::MatrixXd(2, 2) << 0.8, 0.1,
                                    0.2, 0.9).finished();
  return m;
}

// Column-stochastic K x K matrix with diagonal weight at least `floor`.
inline Eigen::MatrixXd RandomStochastic(int k, std::mt19937_64& rng,
                                        double floor = 0.3) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_real_distribution<double> unif(floor, 1.0);
  Eigen::MatrixXd m(k, k);
  for (int j = 0; j < k; ++j) {
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      m(i, j) = gamma(rng);
      total += m(i, j);
    }
    const double keep = unif(rng);
    m.col(j) *= (1.0 - keep) / total;
    m(j, j) += keep;
  }
  return m;
}

// Dataset with sensitive variable "s" and numeric columns "x", "z".
inline Dataset RandomDataset(int n, int levels, std::mt19937_64& rng,
                             bool perturbed_equals_original = true) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, levels - 1);
  std::vector<double> x(n), z(n);
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) {
    x[i] = normal(rng);
    z[i] = normal(rng);
    s[i] = level(rng);
  }
  Dataset data("s", levels);
  data.AddColumn("x", x);
  data.AddColumn("z", z);
  data.SetSensitive(SensitiveTag::kOriginal, s);
  if (perturbed_equals_original) data.SetSensitive(SensitiveTag::kPerturbed, s);
  return data;
}

inline EstimandSpec MeanSpec(const std::string& sensitive = "s",
                             int levels = 2) {
  EstimandSpec spec;
  spec.kind = EstimandKind::kMean;
  spec.response = sensitive;
  spec.sensitive_column = sensitive;
  spec.levels = levels;
  return spec;
}

inline EstimandSpec LogisticSpec(const std::string& sensitive = "s") {
  EstimandSpec spec;
  spec.kind = EstimandKind::kLogistic;
  spec.response = sensitive;
  spec.covariates = {"x"};
  spec.sensitive_column = sensitive;
  spec.sensitive_role = SensitiveRole::kResponse;
  return spec;
}

// Linear regression of "x" on the sensitive level and "z".
inline EstimandSpec LinearSpec(const std::string& sensitive = "s",
                               int levels = 2) {
  EstimandSpec spec;
  spec.kind = EstimandKind::kLinear;
  spec.response = "x";
  spec.covariates = {sensitive, "z"};
  spec.sensitive_column = sensitive;
  spec.sensitive_role = SensitiveRole::kCovariate;
  spec.levels = levels;
  return spec;
}

}  // namespace pram::testing

#endif  // PRAM_TESTS_TEST_UTIL_H_
