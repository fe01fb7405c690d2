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

#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace ddsmc {

inline constexpr int kDefaultProjections = 100;
inline constexpr std::uint64_t kDefaultMetricSeed = 1234;

// Sliced 2-Wasserstein distance between two empirical distributions given as
// d x n and d x m sample matrices (one sample per column). Averages the
// squared 1D W2 distance of the projected, sorted samples over L uniform unit
// directions and returns the square root. Unequal sizes are matched on the
// quantile grid of the merged CDF breakpoints.
double SlicedWasserstein(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                         int num_projections = kDefaultProjections,
                         std::uint64_t seed = kDefaultMetricSeed);

// Squared 1D W2 between two sorted samples with uniform weights.
double Wasserstein1dSq(const Eigen::VectorXd& sorted_a, const Eigen::VectorXd& sorted_b);

// Half the L1 distance between two probability vectors.
double TotalVariation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace ddsmc
