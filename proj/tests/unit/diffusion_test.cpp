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

#include <gtest/gtest.h>

#include "ddsmc/diffusion.hpp"
#include "ddsmc/gmm.hpp"
#include "ddsmc/metrics.hpp"

namespace ddsmc {
namespace {

FunctionScore ZeroScore(Eigen::Index d) {
  return FunctionScore(d, [d](const Eigen::VectorXd&, int) { return Eigen::VectorXd::Zero(d); });
}

TEST(Tweedie, VeZeroScoreIsIdentity) {
  const NoiseSchedule s = BuildPowerSchedule(10.0, 0.1, 5);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(3, -1.0, 2.0);
  EXPECT_TRUE(TweedieReconstruct(ZeroScore(3), x, 3, s).isApprox(x, 1e-15));
}

TEST(Tweedie, VpStandardNormalPrior) {
  const NoiseSchedule s = BuildVpSchedule(100, 1e-3, 0.05);
  const FunctionScore score(2, [](const Eigen::VectorXd& x, int) -> Eigen::VectorXd { return -x; });
  const Eigen::VectorXd x(Eigen::Vector2d(0.3, -1.7));
  const Eigen::VectorXd got = TweedieReconstruct(score, x, 60, s);
  EXPECT_TRUE(got.isApprox(std::sqrt(s.alpha_bar(60)) * x, 1e-14));
}

TEST(Tweedie, MatchesGmmConditionalMean) {
  const GmmProblem problem = GenerateProblem(4, 2, 5);
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  const GmmScore score(problem.prior, s);
  CounterRng rng(MakeKey(0, RandomDomain::kTest));
  for (int t : {1, 50, 300, 700, 1000}) {
    const Eigen::VectorXd x = problem.prior.SampleMarginal(t, s, rng);
    const Eigen::VectorXd tweedie = TweedieReconstruct(score, x, t, s);
    const Eigen::VectorXd exact = problem.prior.PosteriorX0(x, t, s).Mean();
    EXPECT_LT((tweedie - exact).cwiseAbs().maxCoeff(), 1e-10) << "t=" << t;
  }
}

TEST(Ode, ZeroScoreVpTelescopes) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02).WithEvenTimes(10);
  const Eigen::VectorXd x(Eigen::Vector2d(1.0, -2.0));
  const Eigen::VectorXd got = OdeReconstruct(ZeroScore(2), x, 500, s, 1 << 30);
  EXPECT_TRUE(got.isApprox(x / std::sqrt(s.alpha_bar(500)), 1e-12));
}

TEST(Ode, SingleStepGrid) {
  const NoiseSchedule s = NoiseSchedule::VariancePreserving({0.3});
  EXPECT_EQ(OdeTimeGrid(s, 1, 5), (std::vector<int>{1, 0}));
  const FunctionScore score(1, [](const Eigen::VectorXd& x, int) -> Eigen::VectorXd { return -x; });
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 2.0);
  // One DDIM step to t = 0 lands on the Tweedie estimate.
  EXPECT_NEAR(OdeReconstruct(score, x, 1, s, 5)[0], TweedieReconstruct(score, x, 1, s)[0], 1e-14);
}

TEST(Ode, GmmTerminalMatchesPrior) {
  // A 3 x 3 lattice keeps the sampling floor of the metric well below the bound.
  GmmProblemOptions opts;
  opts.num_components = 9;
  opts.lattice_scale = 4.0;
  const GmmProblem problem = GenerateProblem(2, 1, 3, opts);
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02).WithEvenTimes(100);
  const GmmScore score(problem.prior, s);
  const int n = 10000;
  Eigen::MatrixXd out(2, n);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(MakeKey(1, RandomDomain::kTest, 0, static_cast<std::uint32_t>(i)));
    const Eigen::VectorXd x = problem.prior.SampleMarginal(1000, s, rng);
    out.col(i) = OdeReconstruct(score, x, 1000, s, 1 << 30);
  }
  const Eigen::MatrixXd ref = GmmPriorSample(problem.prior, n, 9);
  EXPECT_LT(SlicedWasserstein(out, ref), 0.1);
}

TEST(PriorTransition, VeDecoupled) {
  const NoiseSchedule s = NoiseSchedule::VarianceExploding({2.0, 3.0});
  const Eigen::VectorXd x0hat(Eigen::Vector2d(0.5, -1.0));
  const Eigen::VectorXd x_next(Eigen::Vector2d(4.0, 7.0));
  const DiagGaussian k = PriorTransition(x_next, x0hat, 1, 0.0, s);
  EXPECT_TRUE(k.mean.isApprox(x0hat, 1e-15));
  EXPECT_NEAR(k.var[0], 4.0, 1e-14);
}

TEST(PriorTransition, VeFullKernel) {
  const NoiseSchedule s = NoiseSchedule::VarianceExploding({2.0, 3.0});
  const Eigen::VectorXd x0hat = Eigen::VectorXd::Constant(1, 0.5);
  const Eigen::VectorXd x_next = Eigen::VectorXd::Constant(1, 4.0);
  const DiagGaussian k = PriorTransition(x_next, x0hat, 1, 1.0, s);
  // beta = 9 - 4 = 5, sigma_t^2 = 4.
  EXPECT_NEAR(k.mean[0], (5.0 * 0.5 + 4.0 * 4.0) / 9.0, 1e-14);
  EXPECT_NEAR(k.var[0], 20.0 / 9.0, 1e-14);
}

TEST(PriorTransition, VpDecoupled) {
  const NoiseSchedule s = NoiseSchedule::VariancePreserving({0.5, 0.5, 0.5});
  const Eigen::VectorXd x0hat = Eigen::VectorXd::Constant(1, 3.0);
  const Eigen::VectorXd x_next = Eigen::VectorXd::Constant(1, -1.0);
  const DiagGaussian k = PriorTransition(x_next, x0hat, 2, 0.0, s);
  EXPECT_NEAR(k.mean[0], 1.5, 1e-15);
  EXPECT_NEAR(k.var[0], 0.75, 1e-15);
}

// Product of q(x_t | x_0) and q(x_next | x_t) as a density in x_t.
struct ProductOracle {
  double mean;
  double var;
};

ProductOracle Product(double m1, double v1, double gain, double x_next, double v2) {
  const double precision = 1.0 / v1 + gain * gain / v2;
  return {(m1 / v1 + gain * x_next / v2) / precision, 1.0 / precision};
}

TEST(BackwardKernel, VeEtaOneIsGaussianProduct) {
  const NoiseSchedule s = BuildPowerSchedule(80.0, 0.002, 30).WithEvenTimes(10);
  for (int t : s.times()) {
    if (t == 0 || t == s.times().front()) continue;
    const int t_next = s.NextLarger(t);
    const double x0 = 0.7;
    const double x_next = -1.3;
    const KernelCoefficients k = BackwardKernel(t, t_next, 1.0, s);
    const ProductOracle o = Product(x0, s.sigma_sq(t), 1.0, x_next, s.JumpBeta(t, t_next));
    EXPECT_NEAR(k.recon_coef * x0 + k.state_coef * x_next, o.mean, 1e-12 * (1 + std::abs(o.mean)));
    EXPECT_NEAR(k.var, o.var, 1e-12 * o.var);
  }
}

TEST(BackwardKernel, VpEtaOneIsGaussianProduct) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02).WithEvenTimes(20);
  for (int t : s.times()) {
    if (t == 0 || t == s.times().front()) continue;
    const int t_next = s.NextLarger(t);
    const double beta = s.JumpBeta(t, t_next);
    const double x0 = 0.7;
    const double x_next = -1.3;
    const KernelCoefficients k = BackwardKernel(t, t_next, 1.0, s);
    const ProductOracle o = Product(std::sqrt(s.alpha_bar(t)) * x0, 1.0 - s.alpha_bar(t),
                                    std::sqrt(1.0 - beta), x_next, beta);
    EXPECT_NEAR(k.recon_coef * x0 + k.state_coef * x_next, o.mean, 1e-12);
    EXPECT_NEAR(k.var, o.var, 1e-12);
  }
}

TEST(GmmScore, MatchesFiniteDifferences) {
  const GmmProblem problem = GenerateProblem(3, 1, 8);
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  const Eigen::VectorXd x(Eigen::Vector3d(1.5, -3.0, 0.4));
  for (int t : {10, 400, 900}) {
    const Eigen::VectorXd score = problem.prior.Score(x, t, s);
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-5;
      Eigen::VectorXd up = x;
      Eigen::VectorXd down = x;
      up[i] += h;
      down[i] -= h;
      const double fd =
          (problem.prior.MarginalLogDensity(up, t, s) - problem.prior.MarginalLogDensity(down, t, s)) /
          (2 * h);
      EXPECT_NEAR(score[i], fd, 1e-6) << "t=" << t << " i=" << i;
    }
  }
}

}  // namespace
}  // namespace ddsmc
