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

#include "ddsmc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ddsmc/error.hpp"

namespace ddsmc {
namespace {

using nlohmann::json;

std::vector<std::string> Split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double ParseDouble(const std::string& text, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw IoError(std::string("bad ") + what + " field '" + text + "'");
  }
  return v;
}

long long ParseInt(const std::string& text, const char* what) {
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw IoError(std::string("bad ") + what + " field '" + text + "'");
  }
  return v;
}

std::uint64_t ParseUint(const std::string& text, const char* what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw IoError(std::string("bad ") + what + " field '" + text + "'");
  }
  return v;
}

// Compact label for file names: 0.5 -> "0.5", 1 -> "1".
std::string Label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void EnsureDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

DiscreteState DrawObservation(const ToyDiscretePrior& prior, const UniformKernel& q_y,
                              std::uint64_t seed) {
  CounterRng rng(MakeKey(seed, RandomDomain::kProblem, 1));
  const DiscreteState x_star = prior.Sample(rng);
  return SampleRows(q_y.Apply(OneHot(x_star, prior.d())), rng);
}

}  // namespace

std::string ToString(Task task) {
  switch (task) {
    case Task::kGmm:
      return "gmm";
    case Task::kPriorRecovery:
      return "prior-recovery";
    case Task::kD3smc:
      return "d3smc";
  }
  return "unknown";
}

Task ParseTask(const std::string& text) {
  if (text == "gmm") return Task::kGmm;
  if (text == "prior-recovery") return Task::kPriorRecovery;
  if (text == "d3smc") return Task::kD3smc;
  throw ParameterError("unknown task '" + text + "'");
}

Reconstruction ParseReconstruction(const std::string& text) {
  if (text == "tweedie") return Reconstruction::Tweedie();
  if (text == "ode") return Reconstruction::OdeAllSteps();
  if (text.rfind("ode:", 0) == 0) {
    const long long k = ParseInt(text.substr(4), "ode steps");
    if (k < 1) throw ParameterError("ode steps must be positive");
    return Reconstruction::Ode(static_cast<int>(k));
  }
  throw ParameterError("unknown reconstruction '" + text + "' (tweedie, ode, ode:K)");
}

std::string ReconstructionTag(const Reconstruction& recon) {
  if (recon.kind == ReconstructionKind::kTweedie) return "tweedie";
  if (recon.max_steps >= Reconstruction::OdeAllSteps().max_steps) return "ode";
  return "ode:" + std::to_string(recon.max_steps);
}

LambdaMode ParseLambdaMode(const std::string& text) {
  if (text == "matched") return LambdaMode::kMatched;
  if (text == "daps") return LambdaMode::kDapsStyle;
  throw ParameterError("unknown lambda mode '" + text + "' (matched, daps)");
}

std::string ToString(LambdaMode mode) {
  return mode == LambdaMode::kMatched ? "matched" : "daps";
}

std::vector<std::uint64_t> ExperimentConfig::DefaultSeeds() {
  std::vector<std::uint64_t> seeds(20);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
  return seeds;
}

std::filesystem::path ExperimentConfig::DefaultOutputDir() {
  const char* env = std::getenv(kOutputDirEnv);
  if (env != nullptr && *env != '\0') return env;
  return "results";
}

ExperimentConfig ExperimentConfig::ForTask(Task task) {
  ExperimentConfig cfg;
  cfg.task = task;
  switch (task) {
    case Task::kGmm:
      cfg.check_min = 0.03;
      cfg.check_max = 0.35;
      break;
    case Task::kPriorRecovery:
      cfg.d_x = 2;
      cfg.d_y = 1;
      cfg.sigma_y = 1e6;
      cfg.eta = 1.0;
      // The prior floor at 10k samples exceeds the bound, and short chains
      // carry their own discretization bias, hence long chains and many draws.
      cfg.num_particles = 1;
      cfg.draws_per_run = 1;
      cfg.steps = 500;
      cfg.num_samples = 200000;
      cfg.seeds = {0};
      cfg.check_max = 0.15;
      break;
    case Task::kD3smc:
      cfg.eta = 0.0;
      cfg.num_particles = 1000;
      cfg.num_samples = 100000;
      cfg.seeds = {0};
      cfg.check_max = 0.05;
      break;
  }
  return cfg;
}

void ExperimentConfig::ApplyJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParameterError("config must be an object");

  using Setter = std::function<void(const json&)>;
  const std::map<std::string, std::map<std::string, Setter>> sections = {
      {"problem",
       {{"d_x", [&](const json& v) { d_x = v.get<int>(); }},
        {"d_y", [&](const json& v) { d_y = v.get<int>(); }},
        {"sigma_y", [&](const json& v) { sigma_y = v.get<double>(); }},
        {"num_components", [&](const json& v) { num_components = v.get<int>(); }},
        {"lattice_scale", [&](const json& v) { lattice_scale = v.get<double>(); }}}},
      {"sampler",
       {{"eta", [&](const json& v) { eta = v.get<double>(); }},
        {"recon", [&](const json& v) { recon = ParseReconstruction(v.get<std::string>()); }},
        {"N", [&](const json& v) { num_particles = v.get<int>(); }},
        {"steps", [&](const json& v) { steps = v.get<int>(); }},
        {"lambda", [&](const json& v) { lambda_mode = ParseLambdaMode(v.get<std::string>()); }}}},
      {"schedule",
       {{"T", [&](const json& v) { num_timesteps = v.get<int>(); }},
        {"beta_min", [&](const json& v) { beta_min = v.get<double>(); }},
        {"beta_max", [&](const json& v) { beta_max = v.get<double>(); }}}},
      {"run",
       {{"seeds", [&](const json& v) { seeds = v.get<std::vector<std::uint64_t>>(); }},
        {"num_samples", [&](const json& v) { num_samples = v.get<int>(); }},
        {"draws_per_run", [&](const json& v) { draws_per_run = v.get<int>(); }},
        {"write_samples", [&](const json& v) { write_samples = v.get<bool>(); }}}},
      {"d3smc",
       {{"vars", [&](const json& v) { d3_vars = v.get<int>(); }},
        {"states", [&](const json& v) { d3_states = v.get<int>(); }},
        {"steps", [&](const json& v) { d3_steps = v.get<int>(); }},
        {"beta_y", [&](const json& v) { d3_beta_y = v.get<double>(); }},
        {"coupling", [&](const json& v) { d3_coupling = v.get<double>(); }},
        {"field", [&](const json& v) { d3_field = v.get<double>(); }}}},
      {"metric",
       {{"projections", [&](const json& v) { swd_projections = v.get<int>(); }},
        {"seed", [&](const json& v) { metric_seed = v.get<std::uint64_t>(); }}}},
      {"check",
       {{"min", [&](const json& v) { check_min = v.get<double>(); }},
        {"max", [&](const json& v) { check_max = v.get<double>(); }}}},
  };

  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "task") {
        task = ParseTask(value.get<std::string>());
        continue;
      }
      if (key == "notes") continue;
      if (key == "output_dir") {
        output_dir = value.get<std::string>();
        continue;
      }
      auto section = sections.find(key);
      if (section == sections.end()) throw ParameterError("unknown config section '" + key + "'");
      if (!value.is_object()) throw ParameterError("config section '" + key + "' must be an object");
      for (const auto& [name, field] : value.items()) {
        auto setter = section->second.find(name);
        if (setter == section->second.end()) {
          throw ParameterError("unknown config key '" + key + "." + name + "'");
        }
        setter->second(field);
      }
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config value has the wrong type: ") + e.what());
  }
}

void ExperimentConfig::ApplyFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ApplyJson(buf.str());
}

std::string ExperimentConfig::ToJson() const {
  json doc;
  doc["task"] = ToString(task);
  doc["problem"] = {{"d_x", d_x},
                    {"d_y", d_y},
                    {"sigma_y", sigma_y},
                    {"num_components", num_components},
                    {"lattice_scale", lattice_scale}};
  doc["sampler"] = {{"eta", eta},
                    {"recon", ReconstructionTag(recon)},
                    {"N", num_particles},
                    {"steps", steps},
                    {"lambda", ToString(lambda_mode)}};
  doc["schedule"] = {{"T", num_timesteps},
                     {"beta_min", beta_min},
                     {"beta_max", beta_max}};
  doc["run"] = {{"seeds", seeds},
                {"num_samples", num_samples},
                {"draws_per_run", EffectiveDrawsPerRun()},
                {"write_samples", write_samples}};
  doc["d3smc"] = {{"vars", d3_vars},
                  {"states", d3_states},
                  {"steps", d3_steps},
                  {"beta_y", d3_beta_y},
                  {"coupling", d3_coupling},
                  {"field", d3_field}};
  doc["metric"] = {{"projections", swd_projections}, {"seed", metric_seed}};
  json check = json::object();
  if (check_min) check["min"] = *check_min;
  if (check_max) check["max"] = *check_max;
  doc["check"] = check;
  doc["output_dir"] = output_dir.string();
  doc["notes"] = {{"beta_order", "beta_1 = beta_min rising to beta_T = beta_max"},
                  {"draw_order", "generation runs t = T..0, seeing betas from beta_max down"}};
  return doc.dump(2);
}

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw ParameterError(msg); };
  if (seeds.empty()) fail("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    fail("seeds must be distinct");
  }
  if (num_samples < 1) fail("num_samples must be positive");
  if (draws_per_run < 0) fail("draws_per_run must be non-negative");
  if (swd_projections < 1) fail("swd projections must be positive");
  if (num_particles < 1) fail("N must be positive");
  if (check_min && check_max && *check_min > *check_max) fail("check.min exceeds check.max");
  if (task == Task::kD3smc) {
    ToyDiscretePrior::Uniform(d3_vars, d3_states);  // range checks
    if (d3_steps < 1) fail("d3smc steps must be positive");
    if (!(d3_beta_y >= 0.0 && d3_beta_y <= 1.0)) fail("beta_y must lie in [0, 1]");
    return;
  }
  if (d_x < 1) fail("d_x must be positive");
  if (d_y < 1 || d_y > d_x) fail("d_y must lie in [1, d_x]");
  if (!(sigma_y > 0.0)) fail("sigma_y must be positive");
  if (num_components < 1) fail("num_components must be positive");
  if (!(lattice_scale > 0.0)) fail("lattice_scale must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) fail("eta must lie in [0, 1]");
  if (recon.max_steps < 1) fail("reconstruction steps must be positive");
  if (num_timesteps < 2) fail("schedule T must be at least 2");
  if (steps < 1 || steps > num_timesteps) fail("steps must lie in [1, T]");
  if (!(beta_min > 0.0 && beta_min < beta_max && beta_max < 1.0)) {
    fail("need 0 < beta_min < beta_max < 1");
  }
}

std::string ExperimentConfig::Tag() const {
  std::ostringstream tag;
  if (task == Task::kD3smc) {
    tag << "d3smc_D" << d3_vars << "_d" << d3_states << "_by" << Label(d3_beta_y) << "_N"
        << num_particles << "_T" << d3_steps;
    return tag.str();
  }
  std::string recon_tag = ReconstructionTag(recon);
  std::replace(recon_tag.begin(), recon_tag.end(), ':', '-');
  tag << ToString(task) << "_dx" << d_x << "_dy" << d_y << "_eta" << Label(eta) << "_" << recon_tag
      << "_N" << num_particles << "_steps" << steps;
  if (lambda_mode != LambdaMode::kMatched) tag << "_" << ToString(lambda_mode);
  if (sigma_y != 1.0) tag << "_sy" << Label(sigma_y);
  return tag.str();
}

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string CsvHeader() {
  return "schema_version,task,seed,d_x,d_y,eta,recon,N,steps,num_samples,metric,value,ess_min,"
         "projections,metric_seed,wall_ms";
}

std::string FormatRow(const ResultRow& r) {
  std::ostringstream out;
  out << kCsvSchemaVersion << ',' << ToString(r.task) << ',' << r.seed << ',' << r.d_x << ','
      << r.d_y << ',' << FormatDouble(r.eta) << ',' << r.recon << ',' << r.num_particles << ','
      << r.steps << ',' << r.num_samples << ',' << r.metric << ',' << FormatDouble(r.value) << ','
      << FormatDouble(r.ess_min) << ',' << r.projections << ',' << r.metric_seed << ','
      << FormatDouble(r.wall_ms);
  return out.str();
}

ResultRow ParseRow(const std::string& line) {
  const std::vector<std::string> f = Split(line, ',');
  if (f.size() != 16) throw IoError("CSV row has " + std::to_string(f.size()) + " fields: " + line);
  if (ParseInt(f[0], "schema_version") != kCsvSchemaVersion) {
    throw IoError("CSV row has an unsupported schema version: " + line);
  }
  ResultRow r;
  r.task = ParseTask(f[1]);
  r.seed = ParseUint(f[2], "seed");
  r.d_x = static_cast<int>(ParseInt(f[3], "d_x"));
  r.d_y = static_cast<int>(ParseInt(f[4], "d_y"));
  r.eta = ParseDouble(f[5], "eta");
  r.recon = f[6];
  r.num_particles = static_cast<int>(ParseInt(f[7], "N"));
  r.steps = static_cast<int>(ParseInt(f[8], "steps"));
  r.num_samples = static_cast<int>(ParseInt(f[9], "num_samples"));
  r.metric = f[10];
  r.value = ParseDouble(f[11], "value");
  r.ess_min = ParseDouble(f[12], "ess_min");
  r.projections = static_cast<int>(ParseInt(f[13], "projections"));
  r.metric_seed = ParseUint(f[14], "metric_seed");
  r.wall_ms = ParseDouble(f[15], "wall_ms");
  return r;
}

NoiseSchedule MakeSchedule(const ExperimentConfig& cfg) {
  return BuildVpSchedule(cfg.num_timesteps, cfg.beta_min, cfg.beta_max).WithEvenTimes(cfg.steps);
}

DdsmcConfig MakeSamplerConfig(const ExperimentConfig& cfg) {
  DdsmcConfig out;
  out.eta = cfg.eta;
  out.recon = cfg.recon;
  out.num_particles = cfg.num_particles;
  out.sched = MakeSchedule(cfg);
  out.rho = RhoSchedule(out.sched, RhoMode::GmmDefault());
  out.lambda_mode = cfg.lambda_mode;
  return out;
}

GmmSeedOutput RunGmmSeed(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  if (cfg.task == Task::kD3smc) throw ParameterError("RunGmmSeed needs a continuous task");
  GmmProblemOptions opts;
  opts.num_components = cfg.num_components;
  opts.lattice_scale = cfg.lattice_scale;
  opts.sigma_y = cfg.sigma_y;

  GmmSeedOutput out{GenerateProblem(cfg.d_x, cfg.d_y, seed, opts), {}, {}, 0.0, 0.0, 0, 0};
  const DdsmcConfig sampler_cfg = MakeSamplerConfig(cfg);
  const GmmScore score(out.problem.prior, sampler_cfg.sched);
  const DdsmcSampler sampler(score, out.problem.model, out.problem.y, sampler_cfg);

  const int per_run = cfg.EffectiveDrawsPerRun();
  out.samples.resize(cfg.d_x, cfg.num_samples);
  out.ess_min = std::numeric_limits<double>::infinity();
  int filled = 0;
  while (filled < cfg.num_samples) {
    const auto run = static_cast<std::uint64_t>(out.runs);
    const DdsmcResult res = sampler.Run(DeriveSeed(seed, run, 1));
    const int take = std::min(per_run, cfg.num_samples - filled);
    out.samples.middleCols(filled, take) = res.Draw(take, DeriveSeed(seed, run, 2));
    filled += take;
    out.ess_min = std::min(out.ess_min, res.MinEss());
    out.lambda_clamped_steps = res.lambda_clamped_steps;
    ++out.runs;
  }

  const std::uint64_t ref_seed = DeriveSeed(seed, 0, 3);
  out.reference = cfg.task == Task::kPriorRecovery
                      ? GmmPriorSample(out.problem.prior, cfg.num_samples, ref_seed)
                      : GmmExactPosteriorSample(out.problem, cfg.num_samples, ref_seed);
  out.swd = SlicedWasserstein(out.samples, out.reference, cfg.swd_projections, cfg.metric_seed);
  return out;
}

D3smcSeedOutput RunD3smcSeed(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  if (cfg.task != Task::kD3smc) throw ParameterError("RunD3smcSeed needs the d3smc task");
  const ToyDiscretePrior prior =
      ToyDiscretePrior::IsingChain(cfg.d3_vars, cfg.d3_states, cfg.d3_coupling, cfg.d3_field);
  const UniformKernel q_y{cfg.d3_states, cfg.d3_beta_y};
  const DiscreteSchedule sched = DiscreteSchedule::Linear(cfg.d3_states, cfg.d3_steps);

  D3smcSeedOutput out;
  out.y = DrawObservation(prior, q_y, seed);
  out.reference = BruteForcePosterior(prior, out.y, q_y);
  out.histogram = Eigen::VectorXd::Zero(prior.num_outcomes());
  out.ess_min = std::numeric_limits<double>::infinity();
  int filled = 0;
  while (filled < cfg.num_samples) {
    const auto run = static_cast<std::uint64_t>(out.runs);
    const D3smcResult res =
        RunD3smc(prior, out.y, q_y, sched, cfg.num_particles, DeriveSeed(seed, run, 1));
    out.histogram += res.Histogram(prior);
    for (const auto& r : res.trace) out.ess_min = std::min(out.ess_min, r.ess);
    if (out.runs == 0) {
      out.samples = res.samples;
      out.sample_weights = res.weights;
    }
    filled += cfg.num_particles;
    ++out.runs;
  }
  out.histogram /= static_cast<double>(out.runs);
  out.tv = TotalVariation(out.histogram, out.reference);
  return out;
}

ResultRow RunSeed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row;
  row.seed = seed;
  row.task = cfg.task;
  row.num_particles = cfg.num_particles;
  row.num_samples = cfg.num_samples;
  row.projections = cfg.swd_projections;
  row.metric_seed = cfg.metric_seed;
  if (cfg.task == Task::kD3smc) {
    const D3smcSeedOutput out = RunD3smcSeed(cfg, seed);
    row.d_x = cfg.d3_vars;
    row.d_y = cfg.d3_vars;
    row.eta = 0.0;
    row.recon = "exact-denoiser";
    row.steps = cfg.d3_steps;
    row.metric = "tv";
    row.value = out.tv;
    row.ess_min = out.ess_min;
    if (cfg.write_samples) {
      EnsureDir(cfg.output_dir);
      WriteDiscreteSamplesCsv(out.samples, out.sample_weights,
                              cfg.output_dir / (cfg.Tag() + "_seed" + std::to_string(seed) +
                                                ".samples.csv"));
    }
  } else {
    const GmmSeedOutput out = RunGmmSeed(cfg, seed);
    row.d_x = cfg.d_x;
    row.d_y = cfg.d_y;
    row.eta = cfg.eta;
    row.recon = ReconstructionTag(cfg.recon);
    row.steps = cfg.steps;
    row.metric = "swd";
    row.value = out.swd;
    row.ess_min = out.ess_min;
    if (cfg.write_samples) {
      EnsureDir(cfg.output_dir);
      WriteSamplesCsv(out.samples, cfg.output_dir / (cfg.Tag() + "_seed" + std::to_string(seed) +
                                                     ".samples.csv"));
    }
  }
  row.wall_ms = ElapsedMs(start);
  return row;
}

PriorMatchReport CheckProposalMatchesPrior(const ExperimentConfig& cfg,
                                           const std::vector<double>& etas, std::uint64_t seed) {
  cfg.Validate();
  GmmProblemOptions opts;
  opts.num_components = cfg.num_components;
  opts.lattice_scale = cfg.lattice_scale;
  opts.sigma_y = cfg.sigma_y;
  const GmmProblem problem = GenerateProblem(cfg.d_x, cfg.d_y, seed, opts);
  const WhitenedMeasurement w = Whiten(problem.model, problem.y);
  DdsmcConfig sampler_cfg = MakeSamplerConfig(cfg);

  PriorMatchReport report;
  CounterRng rng(MakeKey(seed, RandomDomain::kTest, 0));
  Eigen::VectorXd x_next(cfg.d_x);
  Eigen::VectorXd x0hat(cfg.d_x);
  for (double eta : etas) {
    sampler_cfg.eta = eta;
    for (int t : sampler_cfg.sched.times()) {
      if (t == 0 || t == sampler_cfg.sched.times().front()) continue;
      if (ComputeLambdaSq(t, eta, sampler_cfg.sched, sampler_cfg.rho, sampler_cfg.lambda_mode)
              .clamped) {
        ++report.clamped;
        continue;
      }
      for (Eigen::Index i = 0; i < cfg.d_x; ++i) {
        x_next[i] = rng.Normal();
        x0hat[i] = cfg.lattice_scale * rng.Normal();
      }
      const DiagGaussian prop = Proposal(x_next, w, t, sampler_cfg, x0hat);
      const DiagGaussian prior = PriorTransition(x_next, x0hat, t, eta, sampler_cfg.sched);
      const double mean_err = (prop.mean - prior.mean).norm() / prior.mean.norm();
      const double var_err =
          ((prop.var - prior.var).array().abs() / prior.var.array()).maxCoeff();
      report.max_rel_error = std::max({report.max_rel_error, mean_err, var_err});
      ++report.checked;
    }
  }
  return report;
}

double BenchmarkSummary::MeanValue() const {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const auto& r : rows) total += r.value;
  return total / static_cast<double>(rows.size());
}

BenchmarkSummary RunBenchmark(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.Validate();
  EnsureDir(cfg.output_dir);
  BenchmarkSummary summary;
  summary.csv_path = cfg.output_dir / (cfg.Tag() + ".csv");

  const std::filesystem::path sidecar = cfg.output_dir / (cfg.Tag() + ".config.json");
  {
    std::ofstream out(sidecar);
    if (!out) throw IoError("cannot open " + sidecar.string() + " for writing");
    out << cfg.ToJson() << '\n';
    if (!out) throw IoError("failed writing " + sidecar.string());
  }

  std::map<std::uint64_t, ResultRow> done;
  bool have_header = false;
  if (std::filesystem::exists(summary.csv_path)) {
    std::ifstream in(summary.csv_path);
    if (!in) throw IoError("cannot open " + summary.csv_path.string());
    std::string line;
    if (std::getline(in, line)) {
      if (line != CsvHeader()) {
        throw IoError(summary.csv_path.string() + ": header does not match this schema version");
      }
      have_header = true;
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        ResultRow r = ParseRow(line);
        done[r.seed] = r;
      } catch (const IoError& e) {
        throw IoError(summary.csv_path.string() + ": " + e.what());
      }
    }
  }

  std::ofstream csv(summary.csv_path, std::ios::app);
  if (!csv) throw IoError("cannot open " + summary.csv_path.string() + " for appending");
  if (!have_header) csv << CsvHeader() << '\n';
  csv.flush();

  for (std::uint64_t seed : cfg.seeds) {
    auto it = done.find(seed);
    if (it != done.end()) {
      summary.rows.push_back(it->second);
      ++summary.resumed;
      if (progress) progress(it->second, true);
      continue;
    }
    ResultRow row = RunSeed(cfg, seed);
    csv << FormatRow(row) << '\n';
    csv.flush();
    if (!csv) throw IoError("failed writing " + summary.csv_path.string());
    summary.rows.push_back(row);
    if (progress) progress(row, false);
  }
  return summary;
}

void ExportScatter(const Eigen::MatrixXd& samples, int dim_i, int dim_j,
                   const std::filesystem::path& path) {
  if (dim_i < 0 || dim_j < 0 || dim_i >= samples.rows() || dim_j >= samples.rows()) {
    throw ParameterError("scatter dimensions out of range");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    out << FormatDouble(samples(dim_i, c)) << ' ' << FormatDouble(samples(dim_j, c)) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Eigen::MatrixXd ReadScatter(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    double a = 0.0;
    double b = 0.0;
    if (!(fields >> a >> b)) throw IoError(path.string() + ": malformed line '" + line + "'");
    values.push_back(a);
    values.push_back(b);
  }
  const auto n = static_cast<Eigen::Index>(values.size() / 2);
  return Eigen::Map<const Eigen::MatrixXd>(values.data(), 2, n);
}

void WriteSamplesCsv(const Eigen::MatrixXd& samples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (Eigen::Index i = 0; i < samples.rows(); ++i) out << (i ? "," : "") << 'x' << i;
  out << '\n';
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      out << (i ? "," : "") << FormatDouble(samples(i, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void WriteDiscreteSamplesCsv(const std::vector<DiscreteState>& samples,
                             const std::vector<double>& weights,
                             const std::filesystem::path& path) {
  if (samples.size() != weights.size()) throw ParameterError("one weight per sample is required");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const Eigen::Index nv = samples.empty() ? 0 : samples.front().size();
  for (Eigen::Index j = 0; j < nv; ++j) out << 'x' << j << ',';
  out << "weight\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (Eigen::Index j = 0; j < nv; ++j) out << samples[i][j] << ',';
    out << FormatDouble(weights[i]) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ddsmc
