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

#include "ddsmc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ddsmc/error.hpp"
#include "ddsmc/random.hpp"

namespace ddsmc {

double Wasserstein1dSq(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (n == m) return (a - b).squaredNorm() / static_cast<double>(n);
  // Walk the merged quantile breakpoints i/n and j/m.
  double total = 0.0;
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double pos = 0.0;
  while (i < n && j < m) {
    const double next_a = static_cast<double>(i + 1) / static_cast<double>(n);
    const double next_b = static_cast<double>(j + 1) / static_cast<double>(m);
    const double next = std::min(next_a, next_b);
    const double diff = a[i] - b[j];
    total += (next - pos) * diff * diff;
    pos = next;
    // Integer comparison avoids drift when the breakpoints coincide.
    const Eigen::Index lhs = (i + 1) * m;
    const Eigen::Index rhs = (j + 1) * n;
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return total;
}

double SlicedWasserstein(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                         int num_projections, std::uint64_t seed) {
  if (s1.rows() != s2.rows()) throw ParameterError("sample dimensions differ");
  if (s1.cols() < 1 || s2.cols() < 1) throw ParameterError("need at least one sample per set");
  if (num_projections < 1) throw ParameterError("need at least one projection");
  const Eigen::Index d = s1.rows();
  double total = 0.0;
  Eigen::VectorXd dir(d);
  for (int l = 0; l < num_projections; ++l) {
    CounterRng rng(MakeKey(seed, RandomDomain::kProjections, static_cast<std::uint32_t>(l)));
    do {
      for (Eigen::Index i = 0; i < d; ++i) dir[i] = rng.Normal();
    } while (dir.squaredNorm() == 0.0);
    dir.normalize();
    Eigen::VectorXd a = s1.transpose() * dir;
    Eigen::VectorXd b = s2.transpose() * dir;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    total += Wasserstein1dSq(a, b);
  }
  return std::sqrt(total / num_projections);
}

double TotalVariation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw ParameterError("distributions have different supports");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace ddsmc
