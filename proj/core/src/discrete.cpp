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

#include "ddsmc/discrete.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ddsmc/error.hpp"

namespace ddsmc {
namespace {

constexpr Eigen::Index kMaxOutcomes = 65536;

int DrawRow(const Eigen::Ref<const Eigen::RowVectorXd>& row, CounterRng& rng) {
  const double u = rng.Uniform() * row.sum();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < row.size(); ++k) {
    acc += row[k];
    if (u < acc) return static_cast<int>(k);
  }
  for (Eigen::Index k = row.size() - 1; k >= 0; --k) {
    if (row[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

void CheckState(const DiscreteState& x, Eigen::Index num_vars, int d, const char* what) {
  if (x.size() != num_vars) {
    std::ostringstream msg;
    msg << what << " has " << x.size() << " variables, expected " << num_vars;
    throw ParameterError(msg.str());
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] < 0 || x[j] >= d) throw ParameterError(std::string(what) + " has a state out of range");
  }
}

}  // namespace

Eigen::MatrixXd UniformKernel::Matrix() const {
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(d, d, move());
  q.diagonal().setConstant(keep());
  return q;
}

Eigen::MatrixXd UniformKernel::Apply(const Eigen::MatrixXd& probs) const {
  if (probs.cols() != d) throw ParameterError("kernel size does not match the rows");
  // Row r times Q: r_k (keep - move) + move * sum(r).
  Eigen::MatrixXd out = probs * (keep() - move());
  out.colwise() += probs.rowwise().sum() * move();
  return out;
}

void UniformKernel::Validate() const {
  if (d < 1) throw ParameterError("kernel needs at least one state");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("kernel beta must lie in [0, 1]");
}

UniformKernel CumulativeKernel(int d, const std::vector<double>& betas) {
  double retention = 1.0;
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("kernel beta must lie in [0, 1]");
    retention *= 1.0 - b;
  }
  UniformKernel q{d, 1.0 - retention};
  q.Validate();
  return q;
}

Eigen::MatrixXd OneHot(const DiscreteState& state, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(state.size(), d);
  for (Eigen::Index j = 0; j < state.size(); ++j) {
    if (state[j] < 0 || state[j] >= d) throw ParameterError("state out of range");
    out(j, state[j]) = 1.0;
  }
  return out;
}

DiscreteSchedule::DiscreteSchedule(int d, std::vector<double> betas)
    : d_(d), betas_(std::move(betas)) {
  if (d_ < 2) throw ParameterError("need at least two states");
  if (betas_.empty()) throw ParameterError("discrete schedule is empty");
  retention_.assign(betas_.size() + 1, 1.0);
  for (std::size_t t = 1; t <= betas_.size(); ++t) {
    const double b = betas_[t - 1];
    if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("kernel beta must lie in [0, 1]");
    retention_[t] = retention_[t - 1] * (1.0 - b);
  }
}

DiscreteSchedule DiscreteSchedule::Linear(int d, int num_steps) {
  if (num_steps < 1) throw ParameterError("need at least one step");
  std::vector<double> betas(static_cast<std::size_t>(num_steps));
  for (int t = 1; t <= num_steps; ++t) {
    betas[static_cast<std::size_t>(t - 1)] = 1.0 / static_cast<double>(num_steps - t + 1);
  }
  return DiscreteSchedule(d, std::move(betas));
}

UniformKernel DiscreteSchedule::Cumulative(int t) const {
  if (t < 0 || t > num_steps()) throw ParameterError("time index out of range");
  return UniformKernel{d_, 1.0 - retention_[static_cast<std::size_t>(t)]};
}

ToyDiscretePrior::ToyDiscretePrior(int num_vars, int d, Eigen::VectorXd table)
    : num_vars_(num_vars), d_(d), table_(std::move(table)) {
  if (num_vars_ < 1 || num_vars_ > 8) throw ParameterError("toy prior needs 1..8 variables");
  if (d_ < 2 || d_ > 4) throw ParameterError("toy prior needs 2..4 states");
  Eigen::Index count = 1;
  for (int j = 0; j < num_vars_; ++j) count *= d_;
  if (table_.size() != count) throw ParameterError("toy prior table has the wrong size");
  if ((table_.array() < 0.0).any() || !table_.allFinite()) {
    throw ParameterError("toy prior table has negative or non-finite entries");
  }
  if (std::abs(table_.sum() - 1.0) > 1e-12) throw ParameterError("toy prior table must sum to 1");
  outcomes_.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    DiscreteState x(num_vars_);
    Eigen::Index rest = i;
    for (int j = 0; j < num_vars_; ++j) {
      x[j] = static_cast<int>(rest % d_);
      rest /= d_;
    }
    outcomes_.push_back(std::move(x));
  }
}

ToyDiscretePrior ToyDiscretePrior::IsingChain(int num_vars, int d, double coupling,
                                              double field) {
  Eigen::Index count = 1;
  for (int j = 0; j < num_vars; ++j) count *= d;
  Eigen::VectorXd table(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::Index rest = i;
    int prev = -1;
    double energy = 0.0;
    for (int j = 0; j < num_vars; ++j) {
      const int s = static_cast<int>(rest % d);
      rest /= d;
      if (j == 0 && s == 0) energy += field;
      if (j > 0 && s == prev) energy += coupling;
      prev = s;
    }
    table[i] = std::exp(energy);
  }
  table /= table.sum();
  return ToyDiscretePrior(num_vars, d, std::move(table));
}

ToyDiscretePrior ToyDiscretePrior::Uniform(int num_vars, int d) {
  Eigen::Index count = 1;
  for (int j = 0; j < num_vars; ++j) count *= d;
  return ToyDiscretePrior(num_vars, d,
                          Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count)));
}

Eigen::Index ToyDiscretePrior::Encode(const DiscreteState& x) const {
  CheckState(x, num_vars_, d_, "state");
  Eigen::Index index = 0;
  for (int j = num_vars_ - 1; j >= 0; --j) index = index * d_ + x[j];
  return index;
}

DiscreteState ToyDiscretePrior::Decode(Eigen::Index index) const {
  if (index < 0 || index >= num_outcomes()) throw ParameterError("outcome index out of range");
  return outcomes_[static_cast<std::size_t>(index)];
}

Eigen::MatrixXd ToyDiscretePrior::Marginals() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(num_vars_, d_);
  for (Eigen::Index i = 0; i < num_outcomes(); ++i) {
    const DiscreteState& x = outcomes_[static_cast<std::size_t>(i)];
    for (int j = 0; j < num_vars_; ++j) m(j, x[j]) += table_[i];
  }
  return m;
}

DiscreteState ToyDiscretePrior::Sample(CounterRng& rng) const {
  return outcomes_[static_cast<std::size_t>(DrawRow(table_.transpose(), rng))];
}

void SaveToyPrior(const ToyDiscretePrior& prior, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "ddsmc-toy-prior";
  j["version"] = 1;
  j["num_vars"] = prior.num_vars();
  j["d"] = prior.d();
  j["table"] = std::vector<double>(prior.table().data(),
                                   prior.table().data() + prior.table().size());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

ToyDiscretePrior LoadToyPrior(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    if (j.value("format", std::string()) != "ddsmc-toy-prior") {
      throw IoError(path.string() + ": not a ddsmc-toy-prior file");
    }
    const auto values = j.at("table").get<std::vector<double>>();
    Eigen::VectorXd table =
        Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return ToyDiscretePrior(j.at("num_vars").get<int>(), j.at("d").get<int>(), std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Eigen::MatrixXd ExactDenoiser(const ToyDiscretePrior& prior, const DiscreteState& x_t,
                              const UniformKernel& q_bar) {
  CheckState(x_t, prior.num_vars(), prior.d(), "x_t");
  if (q_bar.d != prior.d()) throw ParameterError("kernel size does not match the prior");
  const int nv = prior.num_vars();
  Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(nv, prior.d());
  double total = 0.0;
  for (Eigen::Index i = 0; i < prior.num_outcomes(); ++i) {
    const double p0 = prior.table()[i];
    if (p0 == 0.0) continue;
    const DiscreteState x0 = prior.Decode(i);
    double w = p0;
    for (int j = 0; j < nv; ++j) w *= q_bar(x0[j], x_t[j]);
    if (w == 0.0) continue;
    total += w;
    for (int j = 0; j < nv; ++j) marg(j, x0[j]) += w;
  }
  if (!(total > 0.0)) throw DegenerateError("x_t has zero probability under the prior");
  return marg / total;
}

Eigen::MatrixXd DiscretePosteriorX0(const Eigen::MatrixXd& pred, const DiscreteState& y,
                                    const UniformKernel& q_y) {
  CheckState(y, pred.rows(), static_cast<int>(pred.cols()), "y");
  if (q_y.d != pred.cols()) throw ParameterError("measurement kernel size mismatch");
  Eigen::MatrixXd post(pred.rows(), pred.cols());
  for (Eigen::Index j = 0; j < pred.rows(); ++j) {
    for (Eigen::Index k = 0; k < pred.cols(); ++k) {
      post(j, k) = q_y(static_cast<int>(k), y[j]) * pred(j, k);
    }
    const double z = post.row(j).sum();
    if (!(z > 0.0)) throw DegenerateError("observation has zero probability under the prediction");
    post.row(j) /= z;
  }
  return post;
}

double DiscreteApproxLogLik(const Eigen::MatrixXd& pred, const DiscreteState& y,
                            const UniformKernel& q_y) {
  CheckState(y, pred.rows(), static_cast<int>(pred.cols()), "y");
  double total = 0.0;
  for (Eigen::Index j = 0; j < pred.rows(); ++j) {
    double z = 0.0;
    for (Eigen::Index k = 0; k < pred.cols(); ++k) z += q_y(static_cast<int>(k), y[j]) * pred(j, k);
    total += std::log(z);
  }
  return total;
}

double DiscreteExactLogLik(const DiscreteState& x0, const DiscreteState& y,
                           const UniformKernel& q_y) {
  CheckState(x0, y.size(), q_y.d, "x0");
  CheckState(y, y.size(), q_y.d, "y");
  double total = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) total += std::log(q_y(x0[j], y[j]));
  return total;
}

Eigen::MatrixXd DiscreteProposal(const Eigen::MatrixXd& x0_posterior, const UniformKernel& q_bar) {
  return q_bar.Apply(x0_posterior);
}

DiscreteState SampleRows(const Eigen::MatrixXd& probs, CounterRng& rng) {
  DiscreteState x(probs.rows());
  for (Eigen::Index j = 0; j < probs.rows(); ++j) x[j] = DrawRow(probs.row(j), rng);
  return x;
}

double RowsLogPmf(const Eigen::MatrixXd& probs, const DiscreteState& x) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < probs.rows(); ++j) total += std::log(probs(j, x[j]));
  return total;
}

Eigen::VectorXd BruteForcePosterior(const ToyDiscretePrior& prior, const DiscreteState& y,
                                    const UniformKernel& q_y) {
  if (prior.num_outcomes() > kMaxOutcomes) throw ParameterError("too many outcomes to enumerate");
  CheckState(y, prior.num_vars(), prior.d(), "y");
  Eigen::VectorXd post(prior.num_outcomes());
  for (Eigen::Index i = 0; i < prior.num_outcomes(); ++i) {
    const DiscreteState x0 = prior.Decode(i);
    double lik = 1.0;
    for (int j = 0; j < prior.num_vars(); ++j) lik *= q_y(x0[j], y[j]);
    post[i] = prior.table()[i] * lik;
  }
  const double z = post.sum();
  if (!(z > 0.0)) throw DegenerateError("observation has zero probability under the prior");
  return post / z;
}

Eigen::VectorXd InducedPrior(const ToyDiscretePrior& prior, const DiscreteSchedule& sched) {
  const Eigen::Index n = prior.num_outcomes();
  if (n > 4096) throw ParameterError("too many outcomes for the chain oracle");
  const int nv = prior.num_vars();
  const int big_t = sched.num_steps();
  std::vector<DiscreteState> outcomes;
  for (Eigen::Index i = 0; i < n; ++i) outcomes.push_back(prior.Decode(i));

  // q(x_T).
  const UniformKernel q_top = sched.Cumulative(big_t);
  Eigen::VectorXd law = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      double e = prior.table()[b];
      for (int j = 0; j < nv; ++j) e *= q_top(outcomes[b][j], outcomes[a][j]);
      law[a] += e;
    }
  }
  for (int t = big_t - 1; t >= 0; --t) {
    const UniformKernel q_from = sched.Cumulative(t + 1);
    const UniformKernel q_to = sched.Cumulative(t);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      if (law[a] == 0.0) continue;
      const Eigen::MatrixXd step = q_to.Apply(ExactDenoiser(prior, outcomes[a], q_from));
      for (Eigen::Index b = 0; b < n; ++b) {
        double p = law[a];
        for (int j = 0; j < nv; ++j) p *= step(j, outcomes[b][j]);
        next[b] += p;
      }
    }
    law = next;
  }
  return law / law.sum();
}

D3smcModel::D3smcModel(const ToyDiscretePrior& prior, const DiscreteState& y,
                       const UniformKernel& q_y, const DiscreteSchedule& sched)
    : prior_(prior), y_(y), q_y_(q_y), sched_(sched) {
  CheckState(y_, prior_.num_vars(), prior_.d(), "y");
  q_y_.Validate();
  if (q_y_.d != prior_.d() || sched_.d() != prior_.d()) {
    throw ParameterError("kernel sizes do not match the prior");
  }
}

D3smcParticle D3smcModel::Init(CounterRng& rng) const {
  // Exact q(x_T): a prior draw pushed through Q-bar_T.
  const UniformKernel q_top = sched_.Cumulative(sched_.num_steps());
  D3smcParticle p;
  p.x = SampleRows(q_top.Apply(OneHot(prior_.Sample(rng), prior_.d())), rng);
  return p;
}

double D3smcModel::Weigh(D3smcParticle& p, int k) const {
  const int t = time_at(k);
  if (t > 0) {
    p.pred = ExactDenoiser(prior_, p.x, sched_.Cumulative(t));
    p.approx_loglik = DiscreteApproxLogLik(p.pred, y_, q_y_);
  } else {
    p.approx_loglik = DiscreteExactLogLik(p.x, y_, q_y_);
  }
  if (k == 0) return p.approx_loglik;
  if (std::isnan(p.prev_approx_loglik) || std::isnan(p.log_transition) ||
      std::isnan(p.log_proposal)) {
    throw SequencingError("particle weighed before being proposed");
  }
  return p.approx_loglik + p.log_transition - p.prev_approx_loglik - p.log_proposal;
}

void D3smcModel::Propose(D3smcParticle& p, int k, CounterRng& rng) const {
  if (std::isnan(p.approx_loglik)) throw SequencingError("particle proposed before being weighed");
  const UniformKernel q_bar = sched_.Cumulative(time_at(k + 1));
  const Eigen::MatrixXd proposal = DiscreteProposal(DiscretePosteriorX0(p.pred, y_, q_y_), q_bar);
  const Eigen::MatrixXd transition = DiscreteProposal(p.pred, q_bar);
  p.x = SampleRows(proposal, rng);
  p.log_proposal = RowsLogPmf(proposal, p.x);
  p.log_transition = RowsLogPmf(transition, p.x);
  p.prev_approx_loglik = p.approx_loglik;
  p.approx_loglik = std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd D3smcResult::Histogram(const ToyDiscretePrior& prior) const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(prior.num_outcomes());
  for (std::size_t i = 0; i < samples.size(); ++i) h[prior.Encode(samples[i])] += weights[i];
  return h / h.sum();
}

D3smcResult RunD3smc(const ToyDiscretePrior& prior, const DiscreteState& y,
                     const UniformKernel& q_y, const DiscreteSchedule& sched, int num_particles,
                     std::uint64_t seed) {
  const D3smcModel model(prior, y, q_y, sched);
  SmcOptions opts;
  opts.num_particles = num_particles;
  opts.seed = seed;
  SmcResult<D3smcParticle> smc = RunSmc(model, opts);
  D3smcResult out;
  out.samples.reserve(smc.particles.size());
  for (auto& p : smc.particles) out.samples.push_back(std::move(p.x));
  out.weights = std::move(smc.weights);
  out.trace = std::move(smc.trace);
  return out;
}

}  // namespace ddsmc
