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

#include "ddsmc/smc.hpp"

#include <algorithm>
#include <cmath>

namespace ddsmc {

std::vector<double> Normalize(const std::vector<double>& log_weights) {
  if (log_weights.empty()) throw ParameterError("no weights to normalize");
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw DegenerateError("log-weight is NaN or +inf");
    }
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) throw DegenerateError("all log-weights are -inf");
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - top);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

double LogMeanExp(const std::vector<double>& log_weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) top = std::max(top, lw);
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  return top + std::log(total / static_cast<double>(log_weights.size()));
}

double Ess(const std::vector<double>& weights) {
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  return 1.0 / sq;
}

std::vector<int> MultinomialAncestors(const std::vector<double>& weights, int n,
                                      CounterRng& rng) {
  if (weights.empty()) throw ParameterError("no weights to resample from");
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  // Last index holding positive mass, so round-off never selects a zero-weight tail.
  std::size_t last_positive = weights.size() - 1;
  while (last_positive > 0 && weights[last_positive] <= 0.0) --last_positive;

  std::vector<int> ancestors(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double u = rng.Uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx > last_positive) idx = last_positive;
    ancestors[static_cast<std::size_t>(j)] = static_cast<int>(idx);
  }
  return ancestors;
}

}  // namespace ddsmc
