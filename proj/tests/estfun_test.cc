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


#include "pram/estfun.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pram/estimators.h"
#include "pram/mechanism.h"
#include "pram/simlab.h"
#include "pram/solver.h"
#include "test_util.h"

namespace pram {
namespace {

using ::pram::testing::LinearSpec;
using ::pram::testing::LogisticSpec;
using ::pram::testing::MeanSpec;

// One record with x = `x`, z = 0.
Dataset OneRecord(double x, int level = 0) {
  Dataset data("s", 2);
  data.AddColumn("x", {x});
  data.AddColumn("z", {0.0});
  data.SetSensitive(SensitiveTag::kOriginal, {level});
  return data;
}

Eigen::VectorXd Eval(const EstimatingFunction& u, const Dataset& data,
                     int level, const Eigen::VectorXd& beta) {
  return u.Value(Record{&data, 0}, level, beta);
}

TEST(ExpitTest, ValuesAndTails) {
  EXPECT_DOUBLE_EQ(Expit(0.0), 0.5);
  EXPECT_NEAR(Expit(0.5), 0.6224593312018546, 1e-15);
  EXPECT_EQ(Expit(800.0), 1.0);
  EXPECT_EQ(Expit(-800.0), 0.0);
  EXPECT_FALSE(std::isnan(Expit(-1e308)));
}

TEST(BuildMeanTest, Values) {
  const Dataset data = OneRecord(0.0);
  const EstimatingFunction u = BuildMean(MeanSpec(), data);
  EXPECT_EQ(u.dim(), 1);
  EXPECT_DOUBLE_EQ(Eval(u, data, 1, Eigen::VectorXd::Constant(1, 0.4))(0), 0.6);
  EXPECT_DOUBLE_EQ(Eval(u, data, 0, Eigen::VectorXd::Zero(1))(0), 0.0);
}

TEST(BuildMeanTest, SampleMean) {
  Dataset data("s", 2);
  data.SetSensitive(SensitiveTag::kOriginal, {0, 0, 1, 1});
  const EstimatingFunction u = BuildMean(MeanSpec(), data);
  EXPECT_NEAR(OracleEstimate(data, u).beta_hat(0), 0.5, 1e-14);
}

TEST(BuildLogisticTest, Values) {
  const Dataset at_zero = OneRecord(0.0);
  const EstimatingFunction u = BuildLogistic(LogisticSpec(), at_zero);
  EXPECT_EQ(u.dim(), 2);
  const Eigen::VectorXd a = Eval(u, at_zero, 1, Eigen::Vector2d(0.0, 0.0));
  EXPECT_DOUBLE_EQ(a(0), 0.5);
  EXPECT_DOUBLE_EQ(a(1), 0.0);

  const Dataset at_one = OneRecord(1.0);
  const Eigen::VectorXd b = Eval(u, at_one, 0, Eigen::Vector2d(-1.0, 1.5));
  EXPECT_NEAR(b(0), -0.6224593312018546, 1e-12);
  EXPECT_NEAR(b(1), -0.6224593312018546, 1e-12);
}

TEST(BuildLogisticTest, RejectsNonBinary) {
  EstimandSpec spec = LogisticSpec();
  spec.levels = 3;
  Dataset data("s", 3);
  data.AddColumn("x", {1.0});
  try {
    BuildLogistic(spec, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonBinaryResponse);
  }

  // A numeric response column must hold 0/1 values.
  Dataset numeric("s", 2);
  numeric.AddColumn("x", {1.0, 2.0});
  numeric.AddColumn("y", {0.0, 2.0});
  EstimandSpec cov;
  cov.kind = EstimandKind::kLogistic;
  cov.response = "y";
  cov.covariates = {"s", "x"};
  cov.sensitive_column = "s";
  cov.sensitive_role = SensitiveRole::kCovariate;
  try {
    BuildLogistic(cov, numeric);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonBinaryResponse);
  }
}

TEST(BuildLogisticTest, OracleRecoversTruthOnLargeSample) {
  ScenarioConfig cfg = DefaultScenario(ScenarioId::kA1);
  cfg.cells = {Cell{50000, 0.95, 0.95}};
  const Dataset data = GenerateReplicate(cfg, 0, 0);
  const EstimatingFunction u =
      BuildEstimatingFunction(ScenarioEstimand(cfg), data);
  const Eigen::VectorXd beta = OracleEstimate(data, u).beta_hat;
  EXPECT_NEAR(beta(0), -1.0, 0.03);
  EXPECT_NEAR(beta(1), 1.5, 0.03);
}

TEST(BuildLinearTest, Values) {
  Dataset data("s", 2);
  data.AddColumn("y", {0.0});
  EstimandSpec spec;
  spec.kind = EstimandKind::kLinear;
  spec.response = "y";
  spec.covariates = {"s"};
  spec.sensitive_column = "s";
  spec.sensitive_role = SensitiveRole::kCovariate;
  const EstimatingFunction u = BuildLinear(spec, data);
  const Eigen::VectorXd v = Eval(u, data, 0, Eigen::Vector2d(0.0, 0.0));
  EXPECT_DOUBLE_EQ(v(0), 0.0);
  EXPECT_DOUBLE_EQ(v(1), 0.0);
}

TEST(BuildLinearTest, OracleRecoversTruthOnLargeSample) {
  ScenarioConfig cfg = DefaultScenario(ScenarioId::kB1);
  cfg.cells = {Cell{50000, 0.85, 0.85}};
  const Dataset data = GenerateReplicate(cfg, 0, 0);
  const EstimatingFunction u =
      BuildEstimatingFunction(ScenarioEstimand(cfg), data);
  const Eigen::VectorXd beta = OracleEstimate(data, u).beta_hat;
  EXPECT_NEAR(beta(0), -1.0, 0.03);
  EXPECT_NEAR(beta(1), 1.0, 0.03);
}

TEST(BuildLinearTest, MultiCovariateMatchesLeastSquares) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 400;
  std::vector<double> y(n), x2(n), x3(n);
  std::vector<int> s(n);
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd response(n);
  for (int i = 0; i < n; ++i) {
    s[i] = i % 3 == 0 ? 1 : 0;
    x2[i] = normal(rng);
    x3[i] = normal(rng);
    y[i] = 0.3 + 0.8 * s[i] - 0.5 * x2[i] + 0.2 * x3[i] + normal(rng);
    design.row(i) << 1.0, s[i], x2[i], x3[i];
    response(i) = y[i];
  }
  Dataset data("s", 2);
  data.AddColumn("y", y);
  data.AddColumn("x2", x2);
  data.AddColumn("x3", x3);
  data.SetSensitive(SensitiveTag::kOriginal, s);
  EstimandSpec spec;
  spec.kind = EstimandKind::kLinear;
  spec.response = "y";
  spec.covariates = {"s", "x2", "x3"};
  spec.sensitive_column = "s";
  spec.sensitive_role = SensitiveRole::kCovariate;
  const Eigen::VectorXd beta =
      OracleEstimate(data, BuildLinear(spec, data)).beta_hat;
  const Eigen::VectorXd ls =
      design.colPivHouseholderQr().solve(response);
  EXPECT_LT((beta - ls).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BuildLinearTest, CovariateLevelIsSubstituted) {
  // U at level l equals the plain formula with the sensitive column set to l.
  std::mt19937_64 rng(5);
  const Dataset data = testing::RandomDataset(30, 3, rng);
  const EstimatingFunction u = BuildLinear(LinearSpec("s", 3), data);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Eigen::Vector3d beta(unif(rng), unif(rng), unif(rng));
    for (int level = 0; level < 3; ++level) {
      const Eigen::Vector3d design(1.0, level, data.value(1, i));
      const double residual = data.value(0, i) - beta.dot(design);
      const Eigen::VectorXd expected = residual * design;
      const Eigen::VectorXd got = u.Value(Record{&data, i}, level, beta);
      EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(EstimandSpecTest, RoleChecks) {
  Dataset data("s", 2);
  data.AddColumn("x", {1.0});
  EstimandSpec spec = LogisticSpec();
  spec.response = "x";
  EXPECT_THROW(BuildLogistic(spec, data), Error);
  EstimandSpec cov = LinearSpec();
  cov.covariates = {"z"};
  EXPECT_THROW(BuildLinear(cov, data), Error);
  EstimandSpec missing = LinearSpec();
  try {
    BuildLinear(missing, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingColumn);
  }
  EXPECT_EQ(MeanSpec().dim(), 1);
  EXPECT_EQ(LinearSpec().dim(), 3);
}

TEST(JacobianTest, AnalyticMatchesFiniteDifferences) {
  std::mt19937_64 rng(99);
  const Dataset data = testing::RandomDataset(100, 2, rng);
  const std::vector<EstimatingFunction> functions = {
      BuildMean(MeanSpec(), data), BuildLogistic(LogisticSpec(), data),
      BuildLinear(LinearSpec(), data)};
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_int_distribution<int> level(0, 1);
  for (const EstimatingFunction& u : functions) {
    ASSERT_TRUE(u.has_jacobian());
    const int d = u.dim();
    for (std::size_t i = 0; i < data.n(); ++i) {
      Eigen::VectorXd beta(d);
      for (int j = 0; j < d; ++j) beta(j) = unif(rng);
      const int l = level(rng);
      const Record record{&data, i};
      std::vector<double> analytic(d * d);
      u.Jacobian(record, l, std::span<const double>(beta.data(), d), analytic);
      const Eigen::MatrixXd fd = FiniteDifferenceJacobian(
          [&](const Eigen::VectorXd& b) { return u.Value(record, l, b); }, beta,
          1e-6);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          const double exact = analytic[a * d + b];
          EXPECT_LE(std::abs(exact - fd(a, b)),
                    1e-5 * std::max(1.0, std::abs(exact)));
        }
      }
    }
  }
}

TEST(BuildCustomTest, ReproducesMean) {
  Dataset data("s", 2);
  data.SetSensitive(SensitiveTag::kOriginal, {0, 1, 1, 1});
  std::map<int, LevelFunction> table;
  for (int level = 0; level < 2; ++level) {
    table[level] = [level](const Record&, std::span<const double> beta) {
      return Eigen::VectorXd::Constant(1, level - beta[0]);
    };
  }
  const EstimatingFunction custom = BuildCustom(2, 1, table);
  EXPECT_FALSE(custom.has_jacobian());
  const double a = OracleEstimate(data, custom).beta_hat(0);
  const double b = OracleEstimate(data, BuildMean(MeanSpec(), data)).beta_hat(0);
  // Finite-difference Jacobian; the solver stops at max|g| < 1e-10.
  EXPECT_NEAR(a, 0.75, 1e-9);
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(BuildCustomTest, IndicatorMatchesRecoveredFrequency) {
  std::mt19937_64 rng(12);
  const TransitionMatrix p = ValidateTransition(testing::ExampleMatrix());
  Dataset data = testing::RandomDataset(700, 2, rng, false);
  data = Perturb(data, p, 3);
  std::map<int, LevelFunction> table;
  for (int level = 0; level < 2; ++level) {
    table[level] = [level](const Record&, std::span<const double> beta) {
      return Eigen::VectorXd::Constant(1, (level == 1 ? 1.0 : 0.0) - beta[0]);
    };
  }
  const double beta =
      ProposedEstimate(data, p, BuildCustom(2, 1, table)).beta_hat(0);
  const FrequencyVector recovered = RecoverFrequencies(
      EmpiricalFrequencies(data.sensitive(SensitiveTag::kPerturbed), 2),
      InvertTransition(p));
  EXPECT_NEAR(beta, recovered[1], 1e-9);
}

TEST(BuildCustomTest, ThreeLevelDispatchAndErrors) {
  std::map<int, LevelFunction> table;
  for (int level = 0; level < 3; ++level) {
    table[level] = [level](const Record&, std::span<const double> beta) {
      return Eigen::Vector2d(level, beta[1]).eval();
    };
  }
  const EstimatingFunction u = BuildCustom(3, 2, table);
  Dataset data("s", 3);
  data.SetSensitive(SensitiveTag::kOriginal, {0});
  for (int level = 0; level < 3; ++level) {
    const Eigen::VectorXd v = u.Value(Record{&data, 0}, level,
                                      Eigen::Vector2d(0.0, 7.0));
    EXPECT_DOUBLE_EQ(v(0), level);
    EXPECT_DOUBLE_EQ(v(1), 7.0);
  }

  std::map<int, LevelFunction> partial = table;
  partial.erase(1);
  try {
    BuildCustom(3, 2, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLevel);
  }

  const EstimatingFunction wrong = BuildCustom(3, 3, table);
  try {
    wrong.Value(Record{&data, 0}, 0, Eigen::Vector3d::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

}  // namespace
}  // namespace pram
