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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pram/estimators.h"
#include "pram/mechanism.h"
#include "test_util.h"

namespace pram {
namespace {

using ::pram::testing::LinearSpec;
using ::pram::testing::LogisticSpec;
using ::pram::testing::ExampleMatrix;

// s ~ Bernoulli(expit(-0.3 + 0.8 x)), perturbed with P.
Dataset LatentData(int n, const TransitionMatrix& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(n), z(n);
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) {
    x[i] = normal(rng);
    z[i] = normal(rng);
    s[i] = unif(rng) < Expit(-0.3 + 0.8 * x[i]) ? 1 : 0;
  }
  Dataset data("s", 2);
  data.AddColumn("x", x);
  data.AddColumn("z", z);
  data.SetSensitive(SensitiveTag::kOriginal, s);
  return Perturb(data, p, seed + 1);
}

LatentModelSpec OnX(LatentFamily family = LatentFamily::kLogistic) {
  LatentModelSpec spec;
  spec.family = family;
  spec.covariates = {"x"};
  return spec;
}

TEST(LatentFamilyTest, Names) {
  for (LatentFamily f :
       {LatentFamily::kLogistic, LatentFamily::kLogisticNoIntercept,
        LatentFamily::kProbit, LatentFamily::kProbitNoIntercept}) {
    EXPECT_EQ(ParseLatentFamily(LatentFamilyName(f)), f);
  }
  EXPECT_FALSE(ParseLatentFamily("cauchit").has_value());
  EXPECT_TRUE(HasIntercept(LatentFamily::kProbit));
  EXPECT_FALSE(HasIntercept(WithoutIntercept(LatentFamily::kLogistic)));
  EXPECT_NEAR(NormalCdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_DOUBLE_EQ(NormalCdf(0.0), 0.5);
}

TEST(FitLatentModelTest, IdentityIsOrdinaryLogisticMle) {
  const TransitionMatrix id =
      ValidateTransition(Eigen::MatrixXd::Identity(2, 2));
  const Dataset data = LatentData(3000, id, 1);
  const ModelDependentFit fit = FitLatentModel(data, id, OnX());
  ASSERT_TRUE(fit.converged());
  // The MLE is the root of the logistic score, i.e. the naive estimate.
  const EstimateResult naive =
      NaiveEstimate(data, BuildLogistic(LogisticSpec(), data));
  EXPECT_LT((fit.theta() - naive.beta_hat).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(FitLatentModelTest, InterceptOnlyMatchesRecoveredFrequency) {
  const TransitionMatrix p = ValidateTransition(ExampleMatrix());
  Dataset data("s", 2);
  std::vector<int> observed(1000, 1);
  for (int i = 0; i < 400; ++i) observed[i] = 0;
  data.SetSensitive(SensitiveTag::kPerturbed, observed);
  LatentModelSpec spec;
  spec.target = LatentTarget::kLatent;
  const ModelDependentFit fit = FitLatentModel(data, p, spec);
  ASSERT_TRUE(fit.converged());
  EXPECT_NEAR(Expit(fit.theta()(0)), 4.0 / 7.0, 1e-8);

  spec.family = LatentFamily::kProbit;
  const ModelDependentFit probit = FitLatentModel(data, p, spec);
  EXPECT_NEAR(NormalCdf(probit.theta()(0)), 4.0 / 7.0, 1e-8);

  // Observed target: F(theta) is Pr(S* = 1), mapped back through P^-1.
  spec.family = LatentFamily::kLogistic;
  spec.target = LatentTarget::kObserved;
  const ModelDependentFit star = FitLatentModel(data, p, spec);
  EXPECT_NEAR(Expit(star.theta()(0)), 0.6, 1e-8);
  EXPECT_NEAR(star.LatentProbabilities(Record{&data, 0})(1), 4.0 / 7.0,
              1e-8);
}

TEST(FitLatentModelTest, ObservedTargetClipsToSimplex) {
  // Pr(S* = 1) = 0.05 lies below P(1, 0) = 0.2, so P^-1 leaves the simplex.
  const TransitionMatrix p = ValidateTransition(ExampleMatrix());
  Dataset data("s", 2);
  std::vector<int> observed(1000, 0);
  for (int i = 0; i < 50; ++i) observed[i] = 1;
  data.SetSensitive(SensitiveTag::kPerturbed, observed);
  LatentModelSpec spec;
  spec.target = LatentTarget::kObserved;
  const ModelDependentFit fit = FitLatentModel(data, p, spec);
  const Eigen::Vector2d latent = fit.LatentProbabilities(Record{&data, 0});
  EXPECT_DOUBLE_EQ(latent(0), 1.0);
  EXPECT_DOUBLE_EQ(latent(1), 0.0);
}

TEST(LatentTargetTest, Names) {
  for (LatentTarget t : {LatentTarget::kLatent, LatentTarget::kObserved}) {
    EXPECT_EQ(ParseLatentTarget(LatentTargetName(t)), t);
  }
  EXPECT_FALSE(ParseLatentTarget("both").has_value());
  EXPECT_EQ(LatentModelSpec().target, LatentTarget::kObserved);
}

TEST(FitLatentModelTest, RecoversLatentCoefficients) {
  const TransitionMatrix p = ValidateTransition(ExampleMatrix());
  const Dataset data = LatentData(40000, p, 3);
  LatentModelSpec spec = OnX();
  spec.target = LatentTarget::kLatent;
  const ModelDependentFit fit = FitLatentModel(data, p, spec);
  ASSERT_TRUE(fit.converged());
  EXPECT_NEAR(fit.theta()(0), -0.3, 0.1);
  EXPECT_NEAR(fit.theta()(1), 0.8, 0.1);
}

TEST(ModelDependentFitTest, PosteriorIsProperAndMixingIsConsistent) {
  const TransitionMatrix p = ValidateTransition(ExampleMatrix());
  const Dataset data = LatentData(500, p, 4);
  for (LatentTarget target : {LatentTarget::kLatent, LatentTarget::kObserved}) {
    LatentModelSpec spec = OnX();
    spec.target = target;
    const ModelDependentFit fit = FitLatentModel(data, p, spec);
    for (std::size_t i = 0; i < data.n(); i += 7) {
      const Record r{&data, i};
      const Eigen::Vector2d latent = fit.LatentProbabilities(r);
      EXPECT_NEAR(latent.sum(), 1.0, 1e-12);
      const Eigen::Vector2d mixed = fit.ObservedProbabilities(r);
      EXPECT_LT((mixed - ExampleMatrix() * latent).cwiseAbs().maxCoeff(), 1e-12);
      for (int j = 0; j < 2; ++j) {
        const FrequencyVector post = fit.Posterior(r, j);
        EXPECT_NEAR(post.probs().sum(), 1.0, 1e-12);
        EXPECT_GE(post.probs().minCoeff(), 0.0);
        // Bayes' rule by hand.
        const double num = ExampleMatrix()(j, 1) * latent(1);
        EXPECT_NEAR(post[1], num / mixed(j), 1e-12);
      }
    }
  }
}

TEST(ModelDependentEstimateTest, IdentityGivesNaive) {
  const TransitionMatrix id =
      ValidateTransition(Eigen::MatrixXd::Identity(2, 2));
  const Dataset data = LatentData(800, id, 5);
  const EstimatingFunction u = BuildLinear(LinearSpec(), data);
  const ModelDependentFit fit = FitLatentModel(data, id, OnX());
  const EstimateResult md = ModelDependentEstimate(data, id, u, fit);
  EXPECT_EQ(md.method, Method::kModel1);
  EXPECT_LT((md.beta_hat - NaiveEstimate(data, u).beta_hat)
                .cwiseAbs()
                .maxCoeff(),
            1e-10);
  EXPECT_EQ(PosteriorWeights(data, fit).provenance(),
            WeightProvenance::kPosteriorModel);
}

TEST(ModelDependentEstimateTest, NonConvergedFitIsRejected) {
  const TransitionMatrix p = ValidateTransition(ExampleMatrix());
  const Dataset data = LatentData(500, p, 6);
  SolverConfig cfg;
  cfg.max_iterations = 1;
  const ModelDependentFit fit = FitLatentModel(data, p, OnX(), cfg);
  ASSERT_FALSE(fit.converged());
  try {
    ModelDependentEstimate(data, p, BuildLinear(LinearSpec(), data), fit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
  }
}

TEST(FitLatentModelTest, Errors) {
  const TransitionMatrix p = ValidateTransition(ExampleMatrix());
  const Dataset data = LatentData(200, p, 7);
  LatentModelSpec self = OnX();
  self.covariates = {"s"};
  EXPECT_THROW(FitLatentModel(data, p, self), Error);
  LatentModelSpec empty;
  empty.family = LatentFamily::kLogisticNoIntercept;
  EXPECT_THROW(FitLatentModel(data, p, empty), Error);
  LatentModelSpec missing = OnX();
  missing.covariates = {"nope"};
  try {
    FitLatentModel(data, p, missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingColumn);
  }
  std::mt19937_64 rng(8);
  const Dataset three = testing::RandomDataset(100, 3, rng);
  EXPECT_THROW(FitLatentModel(three,
                              ValidateTransition(Eigen::MatrixXd::Identity(3, 3)),
                              OnX()),
               Error);
}

TEST(FitLatentModelTest, SeparatedDataIsDegenerate) {
  // s = 1 exactly when x > 0 and no perturbation: the MLE runs off to
  // infinity.
  std::vector<double> x(200);
  std::vector<int> s(200);
  for (int i = 0; i < 200; ++i) {
    x[i] = i < 100 ? -1.0 - i : 1.0 + i;
    s[i] = i < 100 ? 0 : 1;
  }
  Dataset data("s", 2);
  data.AddColumn("x", x);
  data.SetSensitive(SensitiveTag::kPerturbed, s);
  const TransitionMatrix id =
      ValidateTransition(Eigen::MatrixXd::Identity(2, 2));
  bool rejected = false;
  try {
    const ModelDependentFit fit = FitLatentModel(data, id, OnX());
    rejected = !fit.converged();
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kDegenerateModel;
  }
  EXPECT_TRUE(rejected);
}

}  // namespace
}  // namespace pram
