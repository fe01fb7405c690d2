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

#include "ddsmc/gmm.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ddsmc/error.hpp"

namespace ddsmc {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
// Below this log-ratio exp() underflows to zero in double precision.
constexpr double kUnderflowLog = -745.0;

// Normalizes log-weights in place into probabilities (max-subtracted).
void SoftmaxInPlace(Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    const double shifted = logits[k] - top;
    logits[k] = shifted < kUnderflowLog ? 0.0 : std::exp(shifted);
  }
  logits /= logits.sum();
}

double LogSumExp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  return top + std::log((v.array() - top).exp().sum());
}

int SampleCategorical(const Eigen::VectorXd& probs, CounterRng& rng) {
  const double u = rng.Uniform() * probs.sum();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  // Round-off: fall back to the last positive entry.
  for (Eigen::Index k = probs.size() - 1; k >= 0; --k) {
    if (probs[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

void RequireVp(const NoiseSchedule& sched) {
  if (sched.kind() != ScheduleKind::kVariancePreserving) {
    throw ParameterError("the Gaussian-mixture oracle requires a VP schedule");
  }
}

nlohmann::json VectorToJson(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd JsonToVector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

Eigen::VectorXd DiagMixture::Mean() const { return means * weights; }

int DiagMixture::SampleComponent(CounterRng& rng) const {
  return SampleCategorical(weights, rng);
}

Eigen::VectorXd DiagMixture::Sample(CounterRng& rng) const {
  const int k = SampleComponent(rng);
  Eigen::VectorXd x(means.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = means(i, k) + std::sqrt(var[i]) * rng.Normal();
  }
  return x;
}

GmmPrior::GmmPrior(Eigen::VectorXd weights, Eigen::MatrixXd means)
    : weights_(std::move(weights)), means_(std::move(means)) {
  if (weights_.size() != means_.cols() || weights_.size() == 0) {
    throw ParameterError("mixture weights and means disagree on the component count");
  }
  if ((weights_.array() < 0.0).any()) throw ParameterError("negative mixture weight");
  const double total = weights_.sum();
  if (!(std::abs(total - 1.0) <= 1e-12)) {
    throw ParameterError("mixture weights must sum to 1");
  }
  log_weights_ = weights_.array().log();
  mean_sq_norms_ = means_.colwise().squaredNorm().transpose();
}

GmmPrior GmmPrior::Rotated(const Eigen::MatrixXd& r) const {
  return GmmPrior(weights_, r * means_);
}

double GmmPrior::LogDensity(const Eigen::VectorXd& x0) const {
  Eigen::VectorXd logits(num_components());
  for (int k = 0; k < num_components(); ++k) {
    logits[k] = log_weights_[k] - 0.5 * (x0 - means_.col(k)).squaredNorm();
  }
  return LogSumExp(logits) - 0.5 * static_cast<double>(dim()) * kLog2Pi;
}

Eigen::VectorXd GmmPrior::Sample(CounterRng& rng) const {
  const int k = SampleCategorical(weights_, rng);
  Eigen::VectorXd x(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) x[i] = means_(i, k) + rng.Normal();
  return x;
}

Eigen::VectorXd GmmPrior::Responsibilities(const Eigen::Ref<const Eigen::VectorXd>& x,
                                           double c) const {
  // log w_k - |x - c mu_k|^2 / 2 up to a k-independent constant.
  Eigen::VectorXd logits = log_weights_ + c * (means_.transpose() * x) -
                           (0.5 * c * c) * mean_sq_norms_;
  SoftmaxInPlace(logits);
  return logits;
}

double GmmPrior::MarginalLogDensity(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                                    const NoiseSchedule& sched) const {
  RequireVp(sched);
  const double c = std::sqrt(sched.alpha_bar(t));
  Eigen::VectorXd logits(num_components());
  for (int k = 0; k < num_components(); ++k) {
    logits[k] = log_weights_[k] - 0.5 * (x - c * means_.col(k)).squaredNorm();
  }
  return LogSumExp(logits) - 0.5 * static_cast<double>(dim()) * kLog2Pi;
}

void GmmPrior::Score(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                     const NoiseSchedule& sched, Eigen::Ref<Eigen::VectorXd> out) const {
  RequireVp(sched);
  const double c = std::sqrt(sched.alpha_bar(t));
  const Eigen::VectorXd resp = Responsibilities(x, c);
  out.noalias() = c * (means_ * resp);
  out -= x;
}

Eigen::VectorXd GmmPrior::Score(const Eigen::VectorXd& x, int t,
                                const NoiseSchedule& sched) const {
  Eigen::VectorXd out(x.size());
  Score(x, t, sched, out);
  return out;
}

Eigen::VectorXd GmmPrior::SampleMarginal(int t, const NoiseSchedule& sched,
                                         CounterRng& rng) const {
  RequireVp(sched);
  const double abar = sched.alpha_bar(t);
  Eigen::VectorXd x0 = Sample(rng);
  Eigen::VectorXd xt(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    xt[i] = std::sqrt(abar) * x0[i] + std::sqrt(1.0 - abar) * rng.Normal();
  }
  return xt;
}

DiagMixture GmmPrior::PosteriorX0(const Eigen::VectorXd& x, int t,
                                  const NoiseSchedule& sched) const {
  RequireVp(sched);
  const double abar = sched.alpha_bar(t);
  const double c = std::sqrt(abar);
  DiagMixture post;
  post.weights = Responsibilities(x, c);
  post.means = (1.0 - abar) * means_;
  post.means.colwise() += c * x;
  post.var = Eigen::VectorXd::Constant(dim(), 1.0 - abar);
  return post;
}

GmmScore::GmmScore(GmmPrior prior, NoiseSchedule sched)
    : prior_(std::move(prior)), sched_(std::move(sched)) {
  RequireVp(sched_);
}

void GmmScore::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                        Eigen::Ref<Eigen::VectorXd> out) const {
  prior_.Score(x, t, sched_, out);
}

std::unique_ptr<ScoreModel> GmmScore::InBasis(const Eigen::MatrixXd& v) const {
  return std::make_unique<GmmScore>(prior_.Rotated(v.transpose()), sched_);
}

GmmProblem GenerateProblem(int dim_x, int dim_y, std::uint64_t seed,
                           const GmmProblemOptions& options) {
  if (dim_x < 1 || dim_y < 1 || dim_y > dim_x) {
    throw ParameterError("problem generation needs 1 <= d_y <= d_x");
  }
  if (options.num_components < 1) throw ParameterError("need at least one component");
  CounterRng rng(MakeKey(seed, RandomDomain::kProblem));

  const int k_count = options.num_components;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k_count))));
  const double centre = 0.5 * (side - 1);
  Eigen::MatrixXd means(dim_x, k_count);
  for (int k = 0; k < k_count; ++k) {
    means(0, k) = options.lattice_scale * ((k % side) - centre);
    if (dim_x > 1) means(1, k) = options.lattice_scale * ((k / side) - centre);
    for (int i = 2; i < dim_x; ++i) means(i, k) = rng.Normal();
  }

  Eigen::VectorXd weights(k_count);
  for (int k = 0; k < k_count; ++k) weights[k] = rng.Exponential();
  weights /= weights.sum();

  Eigen::MatrixXd a(dim_y, dim_x);
  for (int i = 0; i < dim_y; ++i) {
    for (int j = 0; j < dim_x; ++j) a(i, j) = rng.Normal();
  }

  GmmPrior prior(weights, means);
  Eigen::VectorXd x_star = prior.Sample(rng);
  Eigen::VectorXd eps(dim_y);
  for (int i = 0; i < dim_y; ++i) eps[i] = rng.Normal();

  GmmProblem problem{std::move(prior), MeasurementModel{a, options.sigma_y},
                     Eigen::VectorXd(), x_star, eps, seed};
  problem.y = a * x_star + options.sigma_y * eps;
  return problem;
}

DiagMixture GmmExactPosteriorWhitened(const GmmPrior& prior, const WhitenedMeasurement& w) {
  if (!(w.sigma_y > 0.0)) {
    throw ParameterError("exact mixture posterior requires sigma_y > 0");
  }
  const Eigen::Index dx = w.dim_x();
  const Eigen::Index dy = w.dim_y();
  const double sig_sq = w.sigma_y * w.sigma_y;
  const Eigen::MatrixXd mu = w.v.transpose() * prior.means();  // whitened means

  DiagMixture post;
  post.var = Eigen::VectorXd::Ones(dx);
  for (Eigen::Index i = 0; i < dy; ++i) {
    post.var[i] = 1.0 / (1.0 + w.s[i] * w.s[i] / sig_sq);
  }

  const int kc = prior.num_components();
  Eigen::VectorXd logits(kc);
  post.means = mu;
  for (int k = 0; k < kc; ++k) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < dy; ++i) {
      const double var = sig_sq + w.s[i] * w.s[i];
      const double r = w.y_prime[i] - w.s[i] * mu(i, k);
      ll += -0.5 * (std::log(var) + r * r / var);
      post.means(i, k) = post.var[i] * (mu(i, k) + w.s[i] * w.y_prime[i] / sig_sq);
    }
    logits[k] = std::log(prior.weights()[k]) + ll;
  }
  SoftmaxInPlace(logits);
  post.weights = logits;
  return post;
}

Eigen::MatrixXd GmmExactPosteriorSample(const GmmProblem& problem, int n, std::uint64_t seed) {
  if (!(problem.model.sigma_y > 0.0)) {
    throw ParameterError("exact mixture posterior sampling requires sigma_y > 0");
  }
  const WhitenedMeasurement w = Whiten(problem.model, problem.y);
  const DiagMixture post = GmmExactPosteriorWhitened(problem.prior, w);
  Eigen::MatrixXd out(problem.prior.dim(), n);
  for (int j = 0; j < n; ++j) {
    CounterRng rng(MakeKey(seed, RandomDomain::kExactSampler, 0, static_cast<std::uint32_t>(j)));
    out.col(j) = w.v * post.Sample(rng);
  }
  return out;
}

Eigen::MatrixXd GmmPriorSample(const GmmPrior& prior, int n, std::uint64_t seed) {
  Eigen::MatrixXd out(prior.dim(), n);
  for (int j = 0; j < n; ++j) {
    CounterRng rng(MakeKey(seed, RandomDomain::kExactSampler, 1, static_cast<std::uint32_t>(j)));
    out.col(j) = prior.Sample(rng);
  }
  return out;
}

void SaveProblem(const GmmProblem& problem, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "ddsmc-gmm-problem";
  j["version"] = 1;
  j["seed"] = problem.seed;
  j["weights"] = VectorToJson(problem.prior.weights());
  nlohmann::json means = nlohmann::json::array();
  for (int k = 0; k < problem.prior.num_components(); ++k) {
    means.push_back(VectorToJson(problem.prior.means().col(k)));
  }
  j["means"] = std::move(means);
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < problem.model.a.rows(); ++i) {
    rows.push_back(VectorToJson(problem.model.a.row(i).transpose()));
  }
  j["A"] = std::move(rows);
  j["sigma_y"] = problem.model.sigma_y;
  j["y"] = VectorToJson(problem.y);
  j["x_star"] = VectorToJson(problem.x_star);
  j["eps"] = VectorToJson(problem.eps);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

GmmProblem LoadProblem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "ddsmc-gmm-problem") {
    throw IoError(path.string() + ": not a ddsmc-gmm-problem file");
  }
  const Eigen::VectorXd weights = JsonToVector(j.at("weights"));
  const auto& means_json = j.at("means");
  const auto k_count = static_cast<Eigen::Index>(means_json.size());
  if (k_count == 0) throw IoError(path.string() + ": no mixture components");
  const Eigen::VectorXd first = JsonToVector(means_json[0]);
  Eigen::MatrixXd means(first.size(), k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) means.col(k) = JsonToVector(means_json[k]);

  const auto& rows = j.at("A");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), means.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) = JsonToVector(rows[i]).transpose();

  GmmProblem problem{GmmPrior(weights, means),
                     MeasurementModel{a, j.at("sigma_y").get<double>()},
                     JsonToVector(j.at("y")), JsonToVector(j.at("x_star")),
                     JsonToVector(j.at("eps")), j.at("seed").get<std::uint64_t>()};
  return problem;
}

}  // namespace ddsmc
