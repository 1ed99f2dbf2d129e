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


#include "pram/simlab.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "pram/parallel.h"

namespace pram {
namespace {

ScenarioConfig Small(ScenarioId id) {
  ScenarioConfig cfg = DefaultScenario(id);
  cfg.cells = {Cell{400, 0.85, 0.85}};
  cfg.replicates = 6;
  cfg.seed = 2024;
  cfg.methods = {Method::kProposed, Method::kOracle, Method::kNaive};
  cfg.se_mode = SeMode::kPlugin;
  cfg.se_methods = {Method::kProposed};
  return cfg;
}

TEST(ScenarioTest, NamesRoundTrip) {
  for (ScenarioId id : {ScenarioId::kA1, ScenarioId::kA2, ScenarioId::kB1,
                        ScenarioId::kB2, ScenarioId::kCustom}) {
    EXPECT_EQ(ParseScenarioId(ScenarioIdName(id)), id);
  }
  EXPECT_FALSE(ParseScenarioId("C3").has_value());
  for (SeMode m : {SeMode::kNone, SeMode::kResample, SeMode::kPlugin}) {
    EXPECT_EQ(ParseSeMode(SeModeName(m)), m);
  }
}

TEST(ScenarioTest, DefaultGrids) {
  const ScenarioConfig a1 = DefaultScenario(ScenarioId::kA1);
  EXPECT_EQ(a1.cells.size(), 18u);
  EXPECT_EQ(a1.cells.front().n, 1000);
  EXPECT_EQ(a1.cells.back().n, 2000);
  EXPECT_DOUBLE_EQ(a1.cells.back().p00, 0.95);
  EXPECT_EQ(a1.design, Design::kResponse);
  EXPECT_EQ(DefaultScenario(ScenarioId::kA2).cells.size(), 25u);
  const ScenarioConfig b2 = DefaultScenario(ScenarioId::kB2, true);
  EXPECT_EQ(b2.cells.size(), 21u * 21u);
  EXPECT_DOUBLE_EQ(b2.cells[22].p00, 0.76);
  EXPECT_DOUBLE_EQ(b2.cells[22].p11, 0.76);
  EXPECT_EQ(b2.design, Design::kCovariate);
  EXPECT_EQ(b2.beta_true, Eigen::Vector2d(-1.0, 1.0));
}

TEST(ScenarioTest, Validation) {
  ScenarioConfig cfg = Small(ScenarioId::kA1);
  EXPECT_NO_THROW(cfg.Validate());
  ScenarioConfig bad = cfg;
  bad.cells = {Cell{99, 0.9, 0.9}};
  EXPECT_THROW(bad.Validate(), Error);
  bad = cfg;
  bad.cells = {Cell{500, 0.5, 0.9}};
  EXPECT_THROW(bad.Validate(), Error);
  bad = cfg;
  bad.se_methods = {Method::kModel1};
  EXPECT_THROW(bad.Validate(), Error);
  bad = cfg;
  bad.se_mode = SeMode::kResample;
  bad.resamples = 20;
  EXPECT_THROW(bad.Validate(), Error);
  bad = cfg;
  bad.methods = {Method::kNaive, Method::kNaive};
  bad.se_methods = {};
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(GenerateReplicateTest, ResponseDesignMarginal) {
  ScenarioConfig cfg = DefaultScenario(ScenarioId::kA1);
  cfg.cells = {Cell{50000, 0.95, 0.95}};
  const Dataset data = GenerateReplicate(cfg, 0, 0);
  double ones = 0.0;
  for (int v : data.sensitive(SensitiveTag::kOriginal)) ones += v;
  // Pr(Y = 1) = E expit(-1 + 1.5 X), X ~ N(0.5, 1), by quadrature.
  EXPECT_NEAR(ones / 50000.0, 0.4559, 0.007);
  double flips = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    flips += data.sensitive(SensitiveTag::kOriginal)[i] !=
             data.sensitive(SensitiveTag::kPerturbed)[i];
  }
  EXPECT_NEAR(flips / 50000.0, 0.05, 0.004);
  EXPECT_EQ(data.sensitive_name(), "y");
  EXPECT_TRUE(data.FindColumn("x").has_value());
}

TEST(GenerateReplicateTest, CovariateDesignRegression) {
  ScenarioConfig cfg = DefaultScenario(ScenarioId::kB1);
  cfg.cells = {Cell{50000, 0.85, 0.85}};
  const Dataset data = GenerateReplicate(cfg, 0, 3);
  const std::span<const int> x = data.sensitive(SensitiveTag::kOriginal);
  const std::size_t y = data.ColumnIndex("y");
  double sums[2] = {0.0, 0.0};
  double counts[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < data.n(); ++i) {
    sums[x[i]] += data.value(y, i);
    counts[x[i]] += 1.0;
  }
  EXPECT_NEAR(counts[1] / 50000.0, 0.5, 0.01);
  EXPECT_NEAR(sums[0] / counts[0], -1.0, 0.02);
  EXPECT_NEAR(sums[1] / counts[1] - sums[0] / counts[0], 1.0, 0.03);
}

TEST(GenerateReplicateTest, ReplicatesAreIndependentAndReproducible) {
  const ScenarioConfig cfg = Small(ScenarioId::kA1);
  const Dataset a = GenerateReplicate(cfg, 0, 1);
  const Dataset b = GenerateReplicate(cfg, 0, 1);
  const Dataset c = GenerateReplicate(cfg, 0, 2);
  EXPECT_TRUE(std::equal(a.column(0).begin(), a.column(0).end(),
                         b.column(0).begin()));
  EXPECT_FALSE(std::equal(a.column(0).begin(), a.column(0).end(),
                          c.column(0).begin()));
  EXPECT_THROW(GenerateReplicate(cfg, 1, 0), Error);
}

TEST(RunScenarioTest, IdenticalAcrossThreadCounts) {
  ScenarioConfig cfg = Small(ScenarioId::kA1);
  cfg.methods.push_back(Method::kModel1);
  cfg.se_mode = SeMode::kResample;
  cfg.resamples = 50;
  SetThreadCount(1);
  std::ostringstream serial;
  WriteMetricsCsv(serial, RunScenario(cfg));
  SetThreadCount(4);
  std::ostringstream parallel;
  WriteMetricsCsv(parallel, RunScenario(cfg));
  SetThreadCount(0);
  EXPECT_EQ(serial.str(), parallel.str());
}

TEST(RunScenarioTest, MetricIdentities) {
  for (ScenarioId id : {ScenarioId::kA1, ScenarioId::kB1}) {
    const MetricsTable table = RunScenario(Small(id));
    ASSERT_EQ(table.rows.size(), 3u);
    for (const MethodMetrics& m : table.rows) {
      ASSERT_EQ(m.used, 6);
      const double r = m.used;
      const Eigen::VectorXd rebuilt =
          m.bias.cwiseAbs2() + m.sd.cwiseAbs2() * (r - 1.0) / r;
      EXPECT_LT((rebuilt - m.mse).cwiseAbs().maxCoeff(), 1e-12);
      const bool with_se = m.method == Method::kProposed;
      EXPECT_EQ(std::isnan(m.se(0)), !with_se);
      EXPECT_EQ(std::isnan(m.cp(0)), !with_se);
      if (with_se) {
        EXPECT_EQ(m.std_errors.rows(), 6);
        EXPECT_GE(m.cp.minCoeff(), 0.0);
        EXPECT_LE(m.cp.maxCoeff(), 1.0);
      }
    }
  }
}

TEST(RunScenarioTest, SingleReplicateHasUndefinedSpread) {
  ScenarioConfig cfg = Small(ScenarioId::kB1);
  cfg.replicates = 1;
  const MetricsTable table = RunScenario(cfg);
  const MethodMetrics& m = table.Find(Method::kProposed, 0);
  EXPECT_TRUE(std::isnan(m.sd(0)));
  EXPECT_TRUE(std::isnan(m.cp(1)));
  EXPECT_FALSE(std::isnan(m.bias(0)));
  std::ostringstream csv;
  WriteMetricsCsv(csv, table);
  EXPECT_NE(csv.str().find(",NA,"), std::string::npos);
}

TEST(RelativeEfficiencyTest, SelfIsOneAndZeroIsRejected) {
  const MetricsTable table = RunScenario(Small(ScenarioId::kB1));
  for (const auto& row :
       RelativeEfficiency(table, Method::kProposed, Method::kProposed)) {
    EXPECT_DOUBLE_EQ(row.summed, 1.0);
    EXPECT_DOUBLE_EQ(row.componentwise(0), 1.0);
  }
  MetricsTable zero = table;
  for (MethodMetrics& m : zero.rows) {
    if (m.method == Method::kOracle) m.mse.setZero();
  }
  try {
    RelativeEfficiency(zero, Method::kProposed, Method::kOracle);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroDenominator);
  }
  EXPECT_THROW(RelativeEfficiency(table, Method::kProposed, Method::kModel1),
               Error);
}

TEST(MetricsOutputTest, CsvAndJsonShape) {
  ScenarioConfig cfg = Small(ScenarioId::kA1);
  cfg.methods.push_back(Method::kModel1);
  const MetricsTable table = RunScenario(cfg);
  std::ostringstream csv;
  WriteMetricsCsv(csv, table);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line,
            "scenario,cell,n,p00,p11,method,coordinate,attempted,used,"
            "failures,se_failures,bias,sd,se,cp,mse");
  int count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 4 * 2);
  const nlohmann::json j = MetricsJson(table);
  EXPECT_EQ(j["config"]["scenario"], "A1");
  EXPECT_EQ(j["metrics"].size(), 4u);
  EXPECT_EQ(j["relative_efficiency"].size(), 3u);
  EXPECT_TRUE(j["metrics"][1]["se"][0].is_null());
}

}  // namespace
}  // namespace pram
