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

#include "ddsmc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddsmc {

double DiagGaussianLogPdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& mean,
                          const Eigen::Ref<const Eigen::VectorXd>& var) {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::max(var[i], kVarianceFloor);
    const double r = x[i] - mean[i];
    total += -0.5 * (kLog2Pi + std::log(v) + r * r / v);
  }
  return total;
}

double DiagGaussian::LogPdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return DiagGaussianLogPdf(x, mean, var);
}

Eigen::VectorXd DiagGaussian::Sample(CounterRng& rng) const {
  Eigen::VectorXd out(mean.size());
  SampleInto(rng, out);
  return out;
}

void DiagGaussian::SampleInto(CounterRng& rng, Eigen::Ref<Eigen::VectorXd> out) const {
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    out[i] = mean[i] + std::sqrt(std::max(var[i], 0.0)) * rng.Normal();
  }
}

}  // namespace ddsmc
