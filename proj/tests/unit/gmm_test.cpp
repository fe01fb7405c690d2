/* Copyright 2026 The DDSMC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ddsmc/gmm.hpp"

namespace ddsmc {
namespace {

GmmPrior SingleComponent(const Eigen::VectorXd& mu) {
  return GmmPrior(Eigen::VectorXd::Ones(1), mu);
}

TEST(GmmScore, StandardNormal) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  const GmmPrior prior = SingleComponent(Eigen::VectorXd::Zero(3));
  const Eigen::VectorXd x(Eigen::Vector3d(0.2, -1.0, 4.0));
  EXPECT_TRUE(prior.Score(x, 321, s).isApprox(-x, 1e-15));
}

TEST(GmmScore, ShiftedNormal) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  const Eigen::VectorXd mu(Eigen::Vector2d(3.0, -2.0));
  const GmmPrior prior = SingleComponent(mu);
  const Eigen::VectorXd x(Eigen::Vector2d(0.5, 0.5));
  const double scale = std::sqrt(s.alpha_bar(600));
  EXPECT_LT((prior.Score(x, 600, s) - (scale * mu - x)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GmmScore, SymmetricPairAtOrigin) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  Eigen::MatrixXd means(2, 2);
  means << 4.0, -4.0, 1.0, -1.0;
  const GmmPrior prior(Eigen::Vector2d(0.5, 0.5), means);
  EXPECT_LT(prior.Score(Eigen::VectorXd::Zero(2), 200, s).norm(), 1e-15);
}

TEST(GmmPosteriorX0, NoNoiseCollapsesToX) {
  const NoiseSchedule s = NoiseSchedule::VariancePreserving({0.0, 0.5});
  const GmmProblem problem = GenerateProblem(2, 1, 0);
  const Eigen::VectorXd x(Eigen::Vector2d(1.25, -0.5));
  const DiagMixture post = problem.prior.PosteriorX0(x, 1, s);
  EXPECT_TRUE(post.Mean().isApprox(x, 1e-14));
  EXPECT_LT(post.var.maxCoeff(), 1e-15);
}

TEST(GmmPosteriorX0, StandardNormalConditioning) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  const GmmPrior prior = SingleComponent(Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd x(Eigen::Vector2d(1.0, 2.0));
  const DiagMixture post = prior.PosteriorX0(x, 400, s);
  const double abar = s.alpha_bar(400);
  EXPECT_TRUE(post.means.col(0).isApprox(std::sqrt(abar) * x, 1e-14));
  EXPECT_NEAR(post.var[0], 1.0 - abar, 1e-15);
}

TEST(GmmExactPosterior, SingleComponentMean) {
  Eigen::MatrixXd a(2, 3);
  a << 1.0, 0.5, -0.3, 0.2, -1.0, 0.7;
  const Eigen::VectorXd mu(Eigen::Vector3d(1.0, -2.0, 0.5));
  GmmProblem problem{SingleComponent(mu), {a, 0.8}, Eigen::Vector2d(0.3, 1.1), {}, {}, 0};
  const Eigen::MatrixXd gain =
      a.transpose() * (a * a.transpose() + 0.64 * Eigen::MatrixXd::Identity(2, 2)).inverse();
  const Eigen::VectorXd m1 = mu + gain * (problem.y - a * mu);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3) - gain * a;

  const int n = 100000;
  const Eigen::MatrixXd draws = GmmExactPosteriorSample(problem, n, 17);
  const Eigen::VectorXd mean = draws.rowwise().mean();
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(mean[i], m1[i], 3.0 * std::sqrt(cov(i, i) / n)) << i;
  }
}

TEST(GmmExactPosterior, UninformativeKeepsPriorWeights) {
  GmmProblem problem = GenerateProblem(4, 2, 3);
  problem.model.sigma_y = 1e8;
  const DiagMixture post =
      GmmExactPosteriorWhitened(problem.prior, Whiten(problem.model, problem.y));
  EXPECT_LT((post.weights - problem.prior.weights()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GmmExactPosterior, ConcentratesOnObservedComponent) {
  Eigen::MatrixXd means(2, 3);
  means << -20.0, 0.0, 20.0, 5.0, -5.0, 5.0;
  const GmmPrior prior(Eigen::Vector3d(0.3, 0.3, 0.4), means);
  const GmmProblem problem{prior, {Eigen::MatrixXd::Identity(2, 2), 1.0}, means.col(1), {}, {}, 0};
  const DiagMixture post = GmmExactPosteriorWhitened(prior, Whiten(problem.model, problem.y));
  EXPECT_GT(post.weights[1], 0.99);
}

TEST(GenerateProblem, DeterministicShapeAndIdentity) {
  const GmmProblem a = GenerateProblem(8, 4, 42);
  const GmmProblem b = GenerateProblem(8, 4, 42);
  EXPECT_EQ(a.model.a.rows(), 4);
  EXPECT_EQ(a.model.a.cols(), 8);
  EXPECT_EQ(a.model.a, b.model.a);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.prior.means(), b.prior.means());
  EXPECT_EQ(a.prior.weights(), b.prior.weights());
  EXPECT_LT((a.y - (a.model.a * a.x_star + a.model.sigma_y * a.eps)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(a.prior.weights().sum(), 1.0, 1e-12);
  EXPECT_EQ(a.prior.num_components(), 25);
}

TEST(GenerateProblem, SaveLoadRoundTrip) {
  const GmmProblem a = GenerateProblem(3, 2, 5);
  const auto path = std::filesystem::temp_directory_path() / "ddsmc_problem_roundtrip.json";
  SaveProblem(a, path);
  const GmmProblem b = LoadProblem(path);
  EXPECT_EQ(a.model.a, b.model.a);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.prior.means(), b.prior.means());
  EXPECT_EQ(a.prior.weights(), b.prior.weights());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace ddsmc
