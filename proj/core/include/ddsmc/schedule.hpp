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

#include <string>
#include <vector>

namespace ddsmc {

enum class ScheduleKind { kVarianceExploding, kVariancePreserving };

std::string ToString(ScheduleKind kind);

// Forward-process noise levels indexed by diffusion time t = 0..T, plus the
// decreasing subsequence of times visited during generation.
//
// VE: x_t = x_0 + sigma_t * noise, with beta_t = sigma_t^2 - sigma_{t-1}^2.
// VP: x_t = sqrt(alpha_bar_t) * x_0 + sqrt(1 - alpha_bar_t) * noise, with
//     alpha_bar_t = prod_{s<=t} (1 - beta_s).
// Index 0 is the data itself: sigma_0 = 0, alpha_bar_0 = 1.
class NoiseSchedule {
 public:
  // Empty placeholder; use one of the factories.
  NoiseSchedule() = default;

  // betas[i] is beta_{i+1}; each must lie in [0, 1).
  static NoiseSchedule VariancePreserving(const std::vector<double>& betas);
  // sigmas[i] is sigma_{i+1}; must be strictly increasing and positive.
  static NoiseSchedule VarianceExploding(const std::vector<double>& sigmas);

  ScheduleKind kind() const { return kind_; }
  int num_steps() const { return static_cast<int>(beta_.size()) - 1; }

  double beta(int t) const;
  double alpha_bar(int t) const;  // VP only
  double sigma_sq(int t) const;   // VE only
  double sigma(int t) const;      // VE only

  // Variance of x_t given x_0: sigma_t^2 (VE) or 1 - alpha_bar_t (VP).
  double noise_var(int t) const;
  // Coefficient of x_0 in the mean of x_t: 1 (VE) or sqrt(alpha_bar_t) (VP).
  double signal_scale(int t) const;

  // Noise increment of a single jump from t to t_next > t along the forward
  // process: sigma_next^2 - sigma_t^2 (VE), 1 - alpha_bar_next / alpha_bar_t (VP).
  // Reduces to beta_{t+1} when t_next = t + 1.
  double JumpBeta(int t, int t_next) const;

  // Generation times, strictly decreasing, ending in 0.
  const std::vector<int>& times() const { return times_; }
  NoiseSchedule WithTimes(std::vector<int> times) const;
  // `steps` jumps with evenly spaced (rounded) indices, endpoints T and 0 included.
  NoiseSchedule WithEvenTimes(int steps) const;

  // Next-larger time after t in times(); throws when t is not a generation
  // time or is the first (largest) one.
  int NextLarger(int t) const;
  // Next-smaller time before t in times(); throws at t = 0.
  int NextSmaller(int t) const;
  bool IsGenerationTime(int t) const;

 private:
  void CheckIndex(int t) const;
  void RebuildPositions();

  ScheduleKind kind_ = ScheduleKind::kVariancePreserving;
  std::vector<double> beta_;       // beta_[0] = 0
  std::vector<double> alpha_bar_;  // VP
  std::vector<double> sigma_sq_;   // VE
  std::vector<int> times_;
  std::vector<int> position_;      // index into times_ or -1
};

// Linear beta ramp, beta_1 = beta_lo rising to beta_T = beta_hi. Generation
// runs t = T..1, so the reverse pass sees betas decreasing from beta_hi.
NoiseSchedule BuildVpSchedule(int num_steps, double beta_lo, double beta_hi);

// VE schedule with sigma_{t_i} = t_i where
//   t_i = (t_max^(1/7) + (T - i)/(T - 1) * (t_min^(1/7) - t_max^(1/7)))^7.
NoiseSchedule BuildPowerSchedule(double t_max, double t_min, int num_steps);

// The 1/7-power interpolation above, returned for i = 1..T (entry i-1).
std::vector<double> PowerInterpolation(double hi, double lo, int num_steps);

}  // namespace ddsmc
