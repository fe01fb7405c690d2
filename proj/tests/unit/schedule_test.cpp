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

#include "ddsmc/error.hpp"
#include "ddsmc/schedule.hpp"

namespace ddsmc {
namespace {

TEST(VpSchedule, TwoStepCumulativeProduct) {
  const NoiseSchedule s = NoiseSchedule::VariancePreserving({0.5, 0.5});
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(2), 0.25);
  EXPECT_DOUBLE_EQ(s.alpha_bar(0), 1.0);
}

TEST(VpSchedule, LinearRampFirstStep) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02);
  EXPECT_NEAR(s.alpha_bar(1), 0.9999, 1e-15);
  EXPECT_NEAR(s.beta(1000), 0.02, 1e-15);
  EXPECT_EQ(s.times().front(), 1000);
  EXPECT_EQ(s.times().back(), 0);
}

TEST(VpSchedule, ZeroBetaAddsNoNoise) {
  const NoiseSchedule s = NoiseSchedule::VariancePreserving({0.0});
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 1.0);
}

TEST(VpSchedule, RejectsBadBeta) {
  EXPECT_THROW(NoiseSchedule::VariancePreserving({1.0}), ParameterError);
  EXPECT_THROW(NoiseSchedule::VariancePreserving({-0.1}), ParameterError);
}

TEST(PowerSchedule, Endpoints) {
  const NoiseSchedule s = BuildPowerSchedule(100.0, 0.1, 3);
  EXPECT_NEAR(s.sigma(3), 100.0, 1e-12);
  EXPECT_NEAR(s.sigma(1), 0.1, 1e-14);
}

TEST(PowerSchedule, Midpoint) {
  const NoiseSchedule s = BuildPowerSchedule(100.0, 0.1, 3);
  const double expected = std::pow((std::pow(100.0, 1.0 / 7) + std::pow(0.1, 1.0 / 7)) / 2, 7);
  EXPECT_NEAR(s.sigma(2), expected, 1e-12);
}

TEST(EvenTimes, GridAndNeighbours) {
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02).WithEvenTimes(20);
  ASSERT_EQ(s.times().size(), 21u);
  EXPECT_EQ(s.times()[0], 1000);
  EXPECT_EQ(s.times()[1], 950);
  EXPECT_EQ(s.NextLarger(0), 50);
  EXPECT_EQ(s.NextSmaller(50), 0);
  EXPECT_THROW(s.NextLarger(1000), ParameterError);
  EXPECT_THROW(s.NextLarger(7), ParameterError);
}

TEST(JumpBeta, ReducesToSingleStepBeta) {
  const NoiseSchedule s = BuildVpSchedule(10, 0.01, 0.1);
  EXPECT_NEAR(s.JumpBeta(4, 5), s.beta(5), 1e-15);
  EXPECT_NEAR(1.0 - s.JumpBeta(2, 6), s.alpha_bar(6) / s.alpha_bar(2), 1e-15);
}

}  // namespace
}  // namespace ddsmc
