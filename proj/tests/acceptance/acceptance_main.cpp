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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   ddsmc_acceptance [--only 1,4] [--expect FILE] [--work-dir DIR]
//
// Without --expect the exit code is nonzero when any criterion fails. With
// --expect, FILE lists "<id> PASS|FAIL" per criterion and the exit code is
// nonzero when any observed status differs from the recorded one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <CLI11.hpp>

#include "ddsmc/ddsmc.hpp"
#include "ddsmc/discrete.hpp"
#include "ddsmc/gmm.hpp"
#include "ddsmc/harness.hpp"
#include "ddsmc/metrics.hpp"
#include "ddsmc/parallel.hpp"

namespace {

using namespace ddsmc;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

void Progress(const std::string& text) {
  std::fprintf(stderr, "  .. %s\n", text.c_str());
}

// Mean metric of cfg over its seeds, without touching the filesystem.
double MeanOverSeeds(const ExperimentConfig& cfg, const std::string& label) {
  const auto start = std::chrono::steady_clock::now();
  double total = 0.0;
  for (std::uint64_t seed : cfg.seeds) total += RunSeed(cfg, seed).value;
  const double mean = total / static_cast<double>(cfg.seeds.size());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Progress(label + ": mean " + Fmt("%.4f", mean) + " (" + Fmt("%.0f", secs) + " s)");
  return mean;
}

ExperimentConfig Gmm(int d_x, int d_y, double eta, const Reconstruction& recon, int particles) {
  ExperimentConfig cfg = ExperimentConfig::ForTask(Task::kGmm);
  cfg.d_x = d_x;
  cfg.d_y = d_y;
  cfg.eta = eta;
  cfg.recon = recon;
  cfg.num_particles = particles;
  return cfg;
}

Outcome PosteriorQuality() {
  const double tweedie =
      MeanOverSeeds(Gmm(8, 4, 1.0, Reconstruction::Tweedie(), 256), "d_x=8 tweedie eta=1");
  const double ode =
      MeanOverSeeds(Gmm(8, 4, 0.5, Reconstruction::OdeAllSteps(), 256), "d_x=8 ode eta=0.5");
  const bool pass = tweedie >= 0.03 && tweedie <= 0.35 && ode >= 0.02 && ode <= 0.35;
  return {pass, "tweedie eta=1 mean swd " + Fmt("%.4f", tweedie) + " in [0.03, 0.35]; ode eta=0.5 " +
                    Fmt("%.4f", ode) + " in [0.02, 0.35]"};
}

Outcome DimensionScaling() {
  const double swd =
      MeanOverSeeds(Gmm(80, 4, 0.5, Reconstruction::OdeAllSteps(), 256), "d_x=80 ode eta=0.5");
  return {swd < 0.7, "d_x=80 mean swd " + Fmt("%.4f", swd) + " < 0.7"};
}

Outcome SingleParticleGap() {
  const double many =
      MeanOverSeeds(Gmm(8, 1, 0.0, Reconstruction::OdeAllSteps(), 256), "d_y=1 eta=0 N=256");
  const double one =
      MeanOverSeeds(Gmm(8, 1, 0.0, Reconstruction::OdeAllSteps(), 1), "d_y=1 eta=0 N=1");
  const double ratio = one / many;
  return {ratio >= 3.0, "N=1 " + Fmt("%.4f", one) + " / N=256 " + Fmt("%.4f", many) + " = " +
                            Fmt("%.2f", ratio) + " (need >= 3)"};
}

Outcome Consistency() {
  std::vector<double> means;
  std::string detail = "d_x=2 d_y=2 mean swd";
  for (int n : {4, 16, 64, 256}) {
    means.push_back(MeanOverSeeds(Gmm(2, 2, 1.0, Reconstruction::Tweedie(), n),
                                  "d_x=2 N=" + std::to_string(n)));
    detail += " N=" + std::to_string(n) + ":" + Fmt("%.4f", means.back());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] <= means[i - 1];
  const bool small = means.back() < 0.2;
  detail += monotone ? "; non-increasing" : "; NOT non-increasing";
  detail += small ? "; N=256 < 0.2" : "; N=256 not < 0.2";
  return {monotone && small, detail};
}

// Resimulating x_t through the exact p(x_0 | x_next) and q(x_t | x_0) must
// reproduce q(x_t).
Outcome MarginalEquality() {
  GmmProblemOptions opts;
  opts.num_components = 9;
  opts.lattice_scale = 4.0;
  const GmmProblem problem = GenerateProblem(2, 1, 0, opts);
  const NoiseSchedule s = BuildVpSchedule(1000, 1e-4, 0.02).WithEvenTimes(20);
  const int n = 10000;
  bool pass = true;
  std::string detail = "swd at 1e4 samples";
  for (int t : {250, 500, 750}) {
    const int t_next = s.NextLarger(t);
    Eigen::MatrixXd direct(2, n);
    Eigen::MatrixXd resim(2, n);
    for (int i = 0; i < n; ++i) {
      const auto idx = static_cast<std::uint32_t>(i);
      CounterRng a(MakeKey(0, RandomDomain::kTest, 1, idx));
      CounterRng b(MakeKey(0, RandomDomain::kTest, 2, idx));
      direct.col(i) = problem.prior.SampleMarginal(t, s, a);
      const Eigen::VectorXd x_next = problem.prior.SampleMarginal(t_next, s, b);
      const Eigen::VectorXd x0 = problem.prior.PosteriorX0(x_next, t_next, s).Sample(b);
      Eigen::VectorXd z(2);
      z << b.Normal(), b.Normal();
      resim.col(i) = std::sqrt(s.alpha_bar(t)) * x0 + std::sqrt(1.0 - s.alpha_bar(t)) * z;
    }
    const double swd = SlicedWasserstein(resim, direct);
    pass = pass && swd < 0.05;
    detail += " t=" + std::to_string(t) + ":" + Fmt("%.4f", swd);
  }
  return {pass, detail + " (need < 0.05 each)"};
}

Outcome PriorRecovery() {
  const ExperimentConfig cfg = ExperimentConfig::ForTask(Task::kPriorRecovery);
  const PriorMatchReport match = CheckProposalMatchesPrior(cfg, {0.0, 0.25, 0.5, 0.75, 1.0}, 0);
  const double swd = MeanOverSeeds(cfg, "prior recovery");
  const bool pass = match.max_rel_error <= 1e-3 && swd < 0.15;
  return {pass, "proposal vs prior max rel err " + Fmt("%.2e", match.max_rel_error) + " over " +
                    std::to_string(match.checked) + " (t, eta) points (" +
                    std::to_string(match.clamped) + " clamped skipped); swd to prior " +
                    Fmt("%.4f", swd) + " < 0.15"};
}

Eigen::MatrixXd RandomMatrix(int rows, int cols, std::uint64_t seed) {
  CounterRng rng(MakeKey(seed, RandomDomain::kTest, 9));
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a(i, j) = rng.Normal();
  }
  return a;
}

Outcome FormulaOracles() {
  double post_err = 0.0;
  double lik_err = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const MeasurementModel m{RandomMatrix(3, 6, k), 0.2 + 0.1 * static_cast<double>(k)};
    const Eigen::VectorXd y = RandomMatrix(3, 1, 100 + k);
    const Eigen::VectorXd x0hat = RandomMatrix(6, 1, 200 + k);
    const double rho = 0.3 + 0.2 * static_cast<double>(k);
    const Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(6, 6) / (rho * rho) +
                                      m.a.transpose() * m.a / (m.sigma_y * m.sigma_y);
    const Eigen::VectorXd b = x0hat / (rho * rho) + m.a.transpose() * y / (m.sigma_y * m.sigma_y);
    const WhitenedMeasurement w = Whiten(m, y);
    const DiagGaussian p = PosteriorX0(w.ToWhitened(x0hat), rho, w);
    post_err = std::max(post_err, (Unwhiten(p.mean, w) - precision.ldlt().solve(b)).cwiseAbs().maxCoeff());
    post_err = std::max(post_err, (w.v * p.var.asDiagonal() * w.v.transpose() - precision.inverse())
                                      .cwiseAbs()
                                      .maxCoeff());
    lik_err = std::max(lik_err, std::abs(ApproxLogLik(w.ToWhitened(x0hat), 0.0, w) - ExactLogLik(y, x0hat, m)));
  }

  double kernel_err = 0.0;
  const NoiseSchedule ve = BuildPowerSchedule(80.0, 0.002, 40).WithEvenTimes(20);
  for (int t : ve.times()) {
    if (t == 0 || t == ve.times().front()) continue;
    const int t_next = ve.NextLarger(t);
    const double v1 = ve.sigma_sq(t);
    const double v2 = ve.JumpBeta(t, t_next);
    const double x0 = 1.7;
    const double x_next = -0.4;
    const double precision = 1.0 / v1 + 1.0 / v2;
    const double mean = (x0 / v1 + x_next / v2) / precision;
    const KernelCoefficients k = BackwardKernel(t, t_next, 1.0, ve);
    kernel_err = std::max(kernel_err, std::abs(k.recon_coef * x0 + k.state_coef * x_next - mean) /
                                          std::max(1.0, std::abs(mean)));
    kernel_err = std::max(kernel_err, std::abs(k.var - 1.0 / precision) * precision);
  }

  double tweedie_err = 0.0;
  const GmmProblem problem = GenerateProblem(8, 4, 0);
  const NoiseSchedule vp = BuildVpSchedule(1000, 1e-4, 0.02);
  const GmmScore score(problem.prior, vp);
  CounterRng rng(MakeKey(1, RandomDomain::kTest, 9));
  for (int t = 1; t <= 1000; t += 37) {
    const Eigen::VectorXd x = problem.prior.SampleMarginal(t, vp, rng);
    tweedie_err = std::max(tweedie_err, (TweedieReconstruct(score, x, t, vp) -
                                         problem.prior.PosteriorX0(x, t, vp).Mean())
                                            .cwiseAbs()
                                            .maxCoeff());
  }

  double cumulative_err = 0.0;
  const DiscreteSchedule ds = DiscreteSchedule::Linear(3, 50);
  Eigen::MatrixXd product = Eigen::MatrixXd::Identity(3, 3);
  for (int t = 1; t <= 50; ++t) {
    product = product * UniformKernel{3, ds.betas()[static_cast<std::size_t>(t - 1)]}.Matrix();
    cumulative_err = std::max(cumulative_err, (ds.Cumulative(t).Matrix() - product).cwiseAbs().maxCoeff());
  }

  const bool pass = post_err <= 1e-8 && kernel_err <= 1e-12 && tweedie_err <= 1e-10 &&
                    lik_err <= 1e-8 && cumulative_err <= 1e-14;
  return {pass, "posterior_x0 " + Fmt("%.1e", post_err) + " (1e-8), VE kernel " +
                    Fmt("%.1e", kernel_err) + " (1e-12), tweedie " + Fmt("%.1e", tweedie_err) +
                    " (1e-10), whitening " + Fmt("%.1e", lik_err) + " (1e-8), cumulative " +
                    Fmt("%.1e", cumulative_err) + " (1e-14)"};
}

Eigen::MatrixXd MarginalsOf(const Eigen::VectorXd& table, const ToyDiscretePrior& prior) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(prior.num_vars(), prior.d());
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const DiscreteState x = prior.Decode(i);
    for (int j = 0; j < prior.num_vars(); ++j) out(j, x[j]) += table[i];
  }
  return out;
}

Outcome D3smcExactness() {
  ExperimentConfig cfg = ExperimentConfig::ForTask(Task::kD3smc);
  const D3smcSeedOutput informative = RunD3smcSeed(cfg, 0);
  Progress("d3smc beta_y=0.6: tv " + Fmt("%.4f", informative.tv));
  cfg.d3_beta_y = 1.0;
  const D3smcSeedOutput flat = RunD3smcSeed(cfg, 0);
  const ToyDiscretePrior prior =
      ToyDiscretePrior::IsingChain(cfg.d3_vars, cfg.d3_states, cfg.d3_coupling, cfg.d3_field);
  const Eigen::MatrixXd got = MarginalsOf(flat.histogram, prior);
  const Eigen::MatrixXd want = prior.Marginals();
  double marginal_tv = 0.0;
  for (int j = 0; j < prior.num_vars(); ++j) {
    marginal_tv = std::max(marginal_tv, TotalVariation(got.row(j).transpose(), want.row(j).transpose()));
  }
  Progress("d3smc beta_y=1: max marginal tv " + Fmt("%.4f", marginal_tv));
  const bool pass = informative.tv < 0.05 && marginal_tv < 0.05;
  return {pass, "tv to enumeration posterior " + Fmt("%.4f", informative.tv) +
                    " < 0.05; uninformative channel max marginal tv " + Fmt("%.4f", marginal_tv) +
                    " < 0.05 (1e5 samples each)"};
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string DropLastColumn(const std::string& csv) {
  std::istringstream in(csv);
  std::string out;
  for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

Outcome Determinism(const fs::path& work) {
  ExperimentConfig gmm = ExperimentConfig::ForTask(Task::kGmm);
  gmm.num_particles = 64;
  gmm.num_samples = 2000;
  gmm.seeds = {0, 1};
  gmm.write_samples = true;
  ExperimentConfig d3 = ExperimentConfig::ForTask(Task::kD3smc);
  d3.num_particles = 200;
  d3.num_samples = 2000;
  d3.d3_steps = 20;
  d3.write_samples = true;

  bool pass = true;
  int files = 0;
  for (ExperimentConfig cfg : {gmm, d3}) {
    std::vector<fs::path> dirs;
    for (int threads : {1, 4}) {
      const fs::path dir = work / ("threads" + std::to_string(threads));
      fs::remove_all(dir);
      cfg.output_dir = dir;
      const ThreadLimit limit(threads);
      RunBenchmark(cfg);
      dirs.push_back(dir);
    }
    const std::string tag = cfg.Tag();
    pass = pass && DropLastColumn(ReadFile(dirs[0] / (tag + ".csv"))) ==
                       DropLastColumn(ReadFile(dirs[1] / (tag + ".csv")));
    for (std::uint64_t seed : cfg.seeds) {
      const std::string name = tag + "_seed" + std::to_string(seed) + ".samples.csv";
      const std::string a = ReadFile(dirs[0] / name);
      pass = pass && !a.empty() && a == ReadFile(dirs[1] / name);
      ++files;
    }
  }
  return {pass, std::to_string(files) + " sample files and 2 result CSVs byte-identical at 1 vs 4 threads"};
}

std::map<int, std::string> ReadExpected(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::map<int, std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    int id = 0;
    std::string status;
    if (fields >> id >> status) out[id] = status;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DDSMC acceptance criteria"};
  std::vector<int> only;
  std::string expect_path;
  std::string work_dir = (fs::temp_directory_path() / "ddsmc_acceptance").string();
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--expect", expect_path, "File of recorded '<id> PASS|FAIL' statuses");
  app.add_option("--work-dir", work_dir, "Scratch directory for determinism runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path work(work_dir);
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"GMM posterior quality", PosteriorQuality},
      {"dimension scaling", DimensionScaling},
      {"SMC vs single particle gap", SingleParticleGap},
      {"consistency in N", Consistency},
      {"resimulation marginal equality", MarginalEquality},
      {"prior recovery", PriorRecovery},
      {"formula oracles", FormulaOracles},
      {"D3SMC exactness", D3smcExactness},
      {"determinism across thread counts", [&] { return Determinism(work); }},
  };

  const std::set<int> selected(only.begin(), only.end());
  std::map<int, std::string> observed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    observed[id] = outcome.pass ? "PASS" : "FAIL";
    std::printf("criterion %d %s: %s (%.0f s)\n", id, observed[id].c_str(),
                (criteria[i].first + ": " + outcome.detail).c_str(), secs);
    std::fflush(stdout);
  }

  if (expect_path.empty()) {
    for (const auto& [id, status] : observed) {
      if (status != "PASS") return 1;
    }
    return 0;
  }
  const std::map<int, std::string> expected = ReadExpected(expect_path);
  int mismatches = 0;
  for (const auto& [id, status] : observed) {
    auto it = expected.find(id);
    if (it == expected.end() || it->second != status) {
      std::printf("criterion %d status %s differs from recorded %s\n", id, status.c_str(),
                  it == expected.end() ? "(none)" : it->second.c_str());
      ++mismatches;
    }
  }
  return mismatches == 0 ? 0 : 1;
}
