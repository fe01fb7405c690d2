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

#include "ddsmc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddsmc/error.hpp"

namespace ddsmc {

std::string ToString(ScheduleKind kind) {
  return kind == ScheduleKind::kVarianceExploding ? "ve" : "vp";
}

NoiseSchedule NoiseSchedule::VariancePreserving(const std::vector<double>& betas) {
  if (betas.empty()) throw ParameterError("VP schedule needs at least one beta");
  NoiseSchedule s;
  s.kind_ = ScheduleKind::kVariancePreserving;
  s.beta_.assign(1, 0.0);
  s.alpha_bar_.assign(1, 1.0);
  for (double b : betas) {
    if (!(b >= 0.0 && b < 1.0)) {
      std::ostringstream msg;
      msg << "VP beta must lie in [0, 1), got " << b;
      throw ParameterError(msg.str());
    }
    s.beta_.push_back(b);
    s.alpha_bar_.push_back(s.alpha_bar_.back() * (1.0 - b));
  }
  s.times_.resize(betas.size() + 1);
  for (std::size_t i = 0; i < s.times_.size(); ++i) {
    s.times_[i] = static_cast<int>(betas.size() - i);
  }
  s.RebuildPositions();
  return s;
}

NoiseSchedule NoiseSchedule::VarianceExploding(const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw ParameterError("VE schedule needs at least one sigma");
  NoiseSchedule s;
  s.kind_ = ScheduleKind::kVarianceExploding;
  s.beta_.assign(1, 0.0);
  s.sigma_sq_.assign(1, 0.0);
  for (double sigma : sigmas) {
    const double sq = sigma * sigma;
    if (!(sigma > 0.0) || !(sq > s.sigma_sq_.back())) {
      throw ParameterError("VE sigmas must be positive and strictly increasing");
    }
    s.beta_.push_back(sq - s.sigma_sq_.back());
    s.sigma_sq_.push_back(sq);
  }
  s.times_.resize(sigmas.size() + 1);
  for (std::size_t i = 0; i < s.times_.size(); ++i) {
    s.times_[i] = static_cast<int>(sigmas.size() - i);
  }
  s.RebuildPositions();
  return s;
}

void NoiseSchedule::CheckIndex(int t) const {
  if (t < 0 || t > num_steps()) {
    std::ostringstream msg;
    msg << "time index " << t << " outside [0, " << num_steps() << "]";
    throw ParameterError(msg.str());
  }
}

void NoiseSchedule::RebuildPositions() {
  position_.assign(beta_.size(), -1);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    position_[times_[i]] = static_cast<int>(i);
  }
}

double NoiseSchedule::beta(int t) const {
  CheckIndex(t);
  return beta_[t];
}

double NoiseSchedule::alpha_bar(int t) const {
  CheckIndex(t);
  if (kind_ != ScheduleKind::kVariancePreserving) {
    throw ParameterError("alpha_bar requested from a VE schedule");
  }
  return alpha_bar_[t];
}

double NoiseSchedule::sigma_sq(int t) const {
  CheckIndex(t);
  if (kind_ != ScheduleKind::kVarianceExploding) {
    throw ParameterError("sigma requested from a VP schedule");
  }
  return sigma_sq_[t];
}

double NoiseSchedule::sigma(int t) const { return std::sqrt(sigma_sq(t)); }

double NoiseSchedule::noise_var(int t) const {
  return kind_ == ScheduleKind::kVarianceExploding ? sigma_sq(t) : 1.0 - alpha_bar(t);
}

double NoiseSchedule::signal_scale(int t) const {
  return kind_ == ScheduleKind::kVarianceExploding ? 1.0 : std::sqrt(alpha_bar(t));
}

double NoiseSchedule::JumpBeta(int t, int t_next) const {
  CheckIndex(t);
  CheckIndex(t_next);
  if (t_next <= t) throw ParameterError("JumpBeta requires t_next > t");
  if (kind_ == ScheduleKind::kVarianceExploding) {
    return sigma_sq_[t_next] - sigma_sq_[t];
  }
  return 1.0 - alpha_bar_[t_next] / alpha_bar_[t];
}

NoiseSchedule NoiseSchedule::WithTimes(std::vector<int> times) const {
  if (times.size() < 2) throw ParameterError("need at least two generation times");
  if (times.back() != 0) throw ParameterError("generation times must end at t = 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    CheckIndex(times[i]);
    if (i > 0 && times[i] >= times[i - 1]) {
      throw ParameterError("generation times must be strictly decreasing");
    }
  }
  NoiseSchedule s = *this;
  s.times_ = std::move(times);
  s.RebuildPositions();
  return s;
}

NoiseSchedule NoiseSchedule::WithEvenTimes(int steps) const {
  const int T = num_steps();
  if (steps < 1 || steps > T) {
    std::ostringstream msg;
    msg << "step count " << steps << " must lie in [1, " << T << "]";
    throw ParameterError(msg.str());
  }
  std::vector<int> times;
  for (int k = steps; k >= 0; --k) {
    const int t = static_cast<int>(std::lround(static_cast<double>(k) * T / steps));
    if (times.empty() || t < times.back()) times.push_back(t);
  }
  return WithTimes(std::move(times));
}

bool NoiseSchedule::IsGenerationTime(int t) const {
  return t >= 0 && t <= num_steps() && position_[t] >= 0;
}

int NoiseSchedule::NextLarger(int t) const {
  if (!IsGenerationTime(t)) throw ParameterError("time is not a generation time");
  const int pos = position_[t];
  if (pos == 0) throw ParameterError("no generation time above the first one");
  return times_[pos - 1];
}

int NoiseSchedule::NextSmaller(int t) const {
  if (!IsGenerationTime(t)) throw ParameterError("time is not a generation time");
  const int pos = position_[t];
  if (pos + 1 >= static_cast<int>(times_.size())) {
    throw ParameterError("no generation time below t = 0");
  }
  return times_[pos + 1];
}

NoiseSchedule BuildVpSchedule(int num_steps, double beta_lo, double beta_hi) {
  if (num_steps < 2) throw ParameterError("VP schedule needs T >= 2");
  if (!(beta_lo > 0.0 && beta_lo < beta_hi && beta_hi < 1.0)) {
    throw ParameterError("VP schedule needs 0 < beta_lo < beta_hi < 1");
  }
  std::vector<double> betas(num_steps);
  for (int i = 0; i < num_steps; ++i) {
    betas[i] = beta_lo + (beta_hi - beta_lo) * i / (num_steps - 1);
  }
  return NoiseSchedule::VariancePreserving(betas);
}

std::vector<double> PowerInterpolation(double hi, double lo, int num_steps) {
  if (num_steps < 2) throw ParameterError("power interpolation needs T >= 2");
  if (!(lo > 0.0 && lo < hi)) throw ParameterError("power interpolation needs 0 < lo < hi");
  constexpr double kInvRho = 1.0 / 7.0;
  const double a = std::pow(hi, kInvRho);
  const double b = std::pow(lo, kInvRho);
  std::vector<double> values(num_steps);
  for (int i = 1; i <= num_steps; ++i) {
    const double frac = static_cast<double>(num_steps - i) / (num_steps - 1);
    values[i - 1] = std::pow(a + frac * (b - a), 7.0);
  }
  // Pin the endpoints against pow round-off.
  values.front() = lo;
  values.back() = hi;
  return values;
}

NoiseSchedule BuildPowerSchedule(double t_max, double t_min, int num_steps) {
  return NoiseSchedule::VarianceExploding(PowerInterpolation(t_max, t_min, num_steps));
}

}  // namespace ddsmc
