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

#include <Eigen/Core>

#include "ddsmc/random.hpp"

namespace ddsmc {

// Smallest variance used inside a log-density.
inline constexpr double kVarianceFloor = 1e-30;

// Gaussian with diagonal covariance. All kernels, proposals and likelihood
// factors in the whitened basis are of this form.
struct DiagGaussian {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;

  Eigen::Index dim() const { return mean.size(); }

  double LogPdf(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd Sample(CounterRng& rng) const;
  // Writes a draw into out (no allocation).
  void SampleInto(CounterRng& rng, Eigen::Ref<Eigen::VectorXd> out) const;
};

// Sum of log N(x_i | mean_i, var_i) with var floored at kVarianceFloor.
double DiagGaussianLogPdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& mean,
                          const Eigen::Ref<const Eigen::VectorXd>& var);

}  // namespace ddsmc
