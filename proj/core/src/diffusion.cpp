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

#include "ddsmc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddsmc/error.hpp"

namespace ddsmc {
namespace {

class RotatedScore final : public ScoreModel {
 public:
  RotatedScore(const ScoreModel& base, Eigen::MatrixXd v) : base_(base), v_(std::move(v)) {}

  Eigen::Index dim() const override { return base_.dim(); }

  void Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                Eigen::Ref<Eigen::VectorXd> out) const override {
    const Eigen::VectorXd original = v_ * x;
    Eigen::VectorXd s(original.size());
    base_.Evaluate(original, t, s);
    out.noalias() = v_.transpose() * s;
  }

 private:
  const ScoreModel& base_;
  Eigen::MatrixXd v_;
};

}  // namespace

Eigen::VectorXd ScoreModel::operator()(const Eigen::VectorXd& x, int t) const {
  Eigen::VectorXd out(x.size());
  Evaluate(x, t, out);
  return out;
}

std::unique_ptr<ScoreModel> ScoreModel::InBasis(const Eigen::MatrixXd& v) const {
  if (v.rows() != dim() || v.cols() != dim()) {
    throw ParameterError("basis matrix does not match the score dimension");
  }
  return std::make_unique<RotatedScore>(*this, v);
}

void FunctionScore::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                             Eigen::Ref<Eigen::VectorXd> out) const {
  out = fn_(Eigen::VectorXd(x), t);
}

std::string ToString(const Reconstruction& recon) {
  if (recon.kind == ReconstructionKind::kTweedie) return "tweedie";
  std::ostringstream s;
  s << "ode";
  if (recon.max_steps < (1 << 30)) s << recon.max_steps;
  return s.str();
}

Eigen::VectorXd TweedieReconstruct(const ScoreModel& score, const Eigen::VectorXd& x,
                                   int t, const NoiseSchedule& sched) {
  if (t <= 0) throw ParameterError("reconstruction requires t > 0");
  Eigen::VectorXd s(x.size());
  score.Evaluate(x, t, s);
  if (sched.kind() == ScheduleKind::kVarianceExploding) {
    return x + sched.sigma_sq(t) * s;
  }
  const double abar = sched.alpha_bar(t);
  return (x + (1.0 - abar) * s) / std::sqrt(abar);
}

std::vector<int> OdeTimeGrid(const NoiseSchedule& sched, int t, int max_steps) {
  if (t <= 0) throw ParameterError("reconstruction requires t > 0");
  if (max_steps < 1) throw ParameterError("ODE reconstruction needs max_steps >= 1");
  std::vector<int> remaining;
  if (sched.IsGenerationTime(t)) {
    const auto& times = sched.times();
    auto it = std::find(times.begin(), times.end(), t);
    remaining.assign(it, times.end());
  } else {
    // Off-grid start: jump straight onto the generation grid below t.
    remaining.push_back(t);
    for (int s : sched.times()) {
      if (s < t) remaining.push_back(s);
    }
  }
  const int intervals = static_cast<int>(remaining.size()) - 1;
  const int steps = std::min(max_steps, intervals);
  if (steps == intervals) return remaining;
  std::vector<int> grid;
  grid.reserve(steps + 1);
  for (int j = 0; j <= steps; ++j) {
    const auto idx = static_cast<std::size_t>(
        std::lround(static_cast<double>(j) * intervals / steps));
    grid.push_back(remaining[idx]);
  }
  return grid;
}

Eigen::VectorXd OdeReconstruct(const ScoreModel& score, const Eigen::VectorXd& x, int t,
                               const NoiseSchedule& sched, int max_steps) {
  const std::vector<int> grid = OdeTimeGrid(sched, t, max_steps);
  Eigen::VectorXd state = x;
  Eigen::VectorXd s(x.size());
  const bool ve = sched.kind() == ScheduleKind::kVarianceExploding;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const int from = grid[k];
    const int to = grid[k + 1];
    score.Evaluate(state, from, s);
    if (ve) {
      const double sig_from = sched.sigma(from);
      const double sig_to = sched.sigma(to);
      state += (sig_from * sig_from - sig_from * sig_to) * s;
    } else {
      const double a_from = sched.alpha_bar(from);
      const double a_to = sched.alpha_bar(to);
      const double ratio = std::sqrt(a_to / a_from);
      const double drift =
          (1.0 - a_from) * ratio - std::sqrt((1.0 - a_to) * (1.0 - a_from));
      state = ratio * state + drift * s;
    }
  }
  return state;
}

Eigen::VectorXd Reconstruct(const ScoreModel& score, const Eigen::VectorXd& x, int t,
                            const NoiseSchedule& sched, const Reconstruction& method) {
  if (method.kind == ReconstructionKind::kTweedie) {
    return TweedieReconstruct(score, x, t, sched);
  }
  return OdeReconstruct(score, x, t, sched, method.max_steps);
}

KernelCoefficients BackwardKernel(int t, int t_next, double eta, const NoiseSchedule& sched) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "eta must lie in [0, 1], got " << eta;
    throw ParameterError(msg.str());
  }
  const double beta = sched.JumpBeta(t, t_next);
  KernelCoefficients k;
  if (sched.kind() == ScheduleKind::kVarianceExploding) {
    const double sig_sq = sched.sigma_sq(t);
    const double denom = eta * sig_sq + beta;
    if (!(denom > 0.0)) throw DegenerateError("backward kernel normalizer is zero");
    k.recon_coef = beta / denom;
    k.state_coef = eta * sig_sq / denom;
    k.var = beta * sig_sq / denom;
  } else {
    const double abar = sched.alpha_bar(t);
    const double abar_next = sched.alpha_bar(t_next);
    const double denom = eta - eta * beta - eta * abar_next + beta;
    if (!(denom > 0.0)) throw DegenerateError("backward kernel normalizer is zero");
    k.recon_coef = std::sqrt(abar) * beta / denom;
    k.state_coef = eta * std::sqrt(1.0 - beta) * (1.0 - abar) / denom;
    k.var = beta * (1.0 - abar) / denom;
  }
  return k;
}

DiagGaussian PriorTransition(const Eigen::VectorXd& x_next, const Eigen::VectorXd& x0hat,
                             int t, double eta, const NoiseSchedule& sched) {
  if (x_next.size() != x0hat.size()) throw ParameterError("dimension mismatch");
  const KernelCoefficients k = BackwardKernel(t, sched.NextLarger(t), eta, sched);
  DiagGaussian out;
  out.mean = k.recon_coef * x0hat + k.state_coef * x_next;
  out.var = Eigen::VectorXd::Constant(x0hat.size(), k.var);
  return out;
}

}  // namespace ddsmc
