#include "pzc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pzc/parallel.hpp"
#include "pzc/solvers.hpp"

#ifndef PZC_GIT_REV
#define PZC_GIT_REV "unknown"
#endif

namespace pzc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* version_string() { return "pzc 1.0 (" PZC_GIT_REV ")"; }

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Sgd: return "sgd";
    case SolverKind::Spider: return "spider";
    case SolverKind::Walker: return "walker";
  }
  throw std::logic_error("unreachable");
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "sgd") return SolverKind::Sgd;
  if (name == "spider") return SolverKind::Spider;
  if (name == "walker") return SolverKind::Walker;
  throw std::invalid_argument("unknown solver: " + name);
}

std::string serialize_manifest(const ExperimentManifest& manifest) {
  std::ostringstream out;
  out << "pzc-manifest 1\n";
  for (const auto& [key, value] : instance_kv(manifest.instance)) {
    out << "instance." << key << ' ' << value << '\n';
  }
  out << "solver.name " << to_string(manifest.solver.kind) << '\n';
  out << "solver.step " << fmt_double(manifest.solver.step) << '\n';
  out << "solver.step_coeff " << fmt_double(manifest.solver.step_coeff) << '\n';
  out << "solver.step_norm " << fmt_double(manifest.solver.step_norm) << '\n';
  out << "solver.epoch_length " << manifest.solver.epoch_length << '\n';
  out << "solver.restart_rounds " << manifest.solver.restart_rounds << '\n';
  out << "solver.max_rounds " << manifest.solver.max_rounds << '\n';
  out << "sweep.eps";
  for (double e : manifest.eps_grid) out << ' ' << fmt_double(e);
  out << '\n';
  out << "sweep.trials " << manifest.trials << '\n';
  out << "sweep.master_seed " << manifest.master_seed << '\n';
  out << "sweep.output " << manifest.output_path << '\n';
  return out.str();
}

ExperimentManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "pzc-manifest 1")
    throw std::invalid_argument("not a manifest (missing header)");
  ExperimentManifest m;
  std::vector<std::pair<std::string, std::string>> instance_pairs;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string value =
        space == std::string::npos ? "" : line.substr(space + 1);
    if (key.rfind("instance.", 0) == 0) {
      instance_pairs.emplace_back(key.substr(9), value);
    } else if (key == "solver.name") {
      m.solver.kind = solver_kind_from_string(value);
    } else if (key == "solver.step") {
      m.solver.step = std::stod(value);
    } else if (key == "solver.step_coeff") {
      m.solver.step_coeff = std::stod(value);
    } else if (key == "solver.restart_rounds") {
      m.solver.restart_rounds = std::stoi(value);
    } else if (key == "solver.step_norm") {
      m.solver.step_norm = std::stod(value);
    } else if (key == "solver.epoch_length") {
      m.solver.epoch_length = std::stoi(value);
    } else if (key == "solver.max_rounds") {
      m.solver.max_rounds = std::stoi(value);
    } else if (key == "sweep.eps") {
      std::istringstream vs(value);
      double e;
      while (vs >> e) m.eps_grid.push_back(e);
    } else if (key == "sweep.trials") {
      m.trials = std::stoi(value);
    } else if (key == "sweep.master_seed") {
      m.master_seed = std::stoull(value);
    } else if (key == "sweep.output") {
      m.output_path = value;
    } else {
      throw std::invalid_argument("unknown manifest key: " + key);
    }
  }
  m.instance = instance_from_kv(instance_pairs);
  if (m.eps_grid.empty()) throw std::invalid_argument("manifest: empty eps grid");
  for (std::size_t i = 1; i < m.eps_grid.size(); ++i) {
    if (!(m.eps_grid[i] < m.eps_grid[i - 1]))
      throw std::invalid_argument("manifest: eps grid must strictly decrease");
  }
  if (m.trials < 1) throw std::invalid_argument("manifest: trials must be >= 1");
  return m;
}

ExperimentManifest load_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
  ScalingFit fit;
  fit.points = points;
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("fit_scaling: need >= 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("fit_scaling: degenerate abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (const auto& [x, y] : points) {
      const double r = y - (fit.intercept + fit.slope * x);
      sse += r * r;
    }
    fit.stderr_slope = std::sqrt(sse / (n - 2) / sxx);
  }
  return fit;
}

namespace {

TrialRow run_trial(const ExperimentManifest& manifest, double eps,
                   int eps_index, int trial) {
  InstanceSpec ispec = manifest.instance;
  ispec.eps = eps;
  const StochasticOracle oracle = build_instance(ispec);
  const auto& cert = oracle.certificate();

  TrialRow row;
  row.eps = eps;
  row.trial = trial;
  row.seed = derive_key(manifest.master_seed,
                        static_cast<std::uint64_t>(eps_index) * 100003 + trial);
  row.lower_bound_rounds = (cert.T - 1) / (2.0 * cert.p);

  MeasuredRun mr;
  int batch = 1;
  switch (manifest.solver.kind) {
    case SolverKind::Sgd: {
      SgdConfig cfg;
      cfg.step = manifest.solver.step;
      if (manifest.solver.step_coeff > 0.0) {
        cfg.step =
            manifest.solver.step_coeff * eps * eps / manifest.instance.sigma2;
      }
      cfg.max_rounds = manifest.solver.max_rounds;
      mr = sgd_measured(cfg, oracle, eps, row.seed);
      batch = 1;
      break;
    }
    case SolverKind::Spider: {
      SpiderConfig cfg;
      cfg.eps_target = eps;
      cfg.step_norm = manifest.solver.step_norm;
      cfg.epoch_length = manifest.solver.epoch_length;
      cfg.restart_rounds = manifest.solver.restart_rounds;
      cfg.max_rounds = manifest.solver.max_rounds;
      mr = spider_measured(cfg, oracle, eps, row.seed);
      batch = 2;
      break;
    }
    case SolverKind::Walker: {
      const int hit =
          walker_hitting_time(oracle, manifest.solver.max_rounds, row.seed);
      mr.rounds = hit > 0 ? hit : manifest.solver.max_rounds;
      mr.stationarity_round = hit;
      batch = 1;
      break;
    }
  }
  row.censored = mr.stationarity_round == 0;
  row.rounds = row.censored ? manifest.solver.max_rounds : mr.stationarity_round;
  row.queries = static_cast<std::int64_t>(row.rounds) * batch;
  row.final_grad_norm = mr.final_grad_norm;
  return row;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SweepResult run_grid(const ExperimentManifest& manifest, std::size_t points) {
  const auto start = std::chrono::steady_clock::now();
  SweepResult result;
  const std::size_t total = points * manifest.trials;
  result.rows.resize(total);
  parallel_chunks(total, [&](int, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t i = b; i < e; ++i) {
      const int eps_index = static_cast<int>(i / manifest.trials);
      const int trial = static_cast<int>(i % manifest.trials);
      result.rows[i] = run_trial(manifest, manifest.eps_grid[eps_index],
                                 eps_index, trial);
    }
  });
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t e = 0; e < points; ++e) {
    std::vector<double> queries;
    for (int t = 0; t < manifest.trials; ++t) {
      const TrialRow& row = result.rows[e * manifest.trials + t];
      queries.push_back(static_cast<double>(row.queries));
      if (row.censored) ++result.censored_total;
    }
    const double med = median(queries);
    result.median_queries.push_back(med);
    fit_points.emplace_back(std::log(1.0 / manifest.eps_grid[e]),
                            std::log(med));
  }
  if (points >= 2) result.fit = fit_scaling(fit_points);
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

}  // namespace

SweepResult run_sweep(const ExperimentManifest& manifest) {
  return run_grid(manifest, manifest.eps_grid.size());
}

SweepResult run_single(const ExperimentManifest& manifest) {
  return run_grid(manifest, 1);
}

std::string results_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "eps,trial,seed,queries,final_grad_norm\n";
  for (const TrialRow& row : result.rows) {
    out << fmt_double(row.eps) << ',' << row.trial << ',' << row.seed << ','
        << row.queries << ',' << fmt_double(row.final_grad_norm) << '\n';
  }
  return out.str();
}

std::string results_summary(const SweepResult& result,
                            const ExperimentManifest& manifest) {
  std::ostringstream out;
  out << "pzc-summary 1\n";
  out << "version " << version_string() << '\n';
  if (!result.median_queries.empty() && result.median_queries.size() >= 2) {
    out << "fit.slope " << fmt_double(result.fit.slope) << '\n';
    out << "fit.intercept " << fmt_double(result.fit.intercept) << '\n';
    out << "fit.stderr " << fmt_double(result.fit.stderr_slope) << '\n';
  }
  for (std::size_t e = 0; e < result.median_queries.size(); ++e) {
    out << "median_queries.eps" << e << ' '
        << fmt_double(result.median_queries[e]) << '\n';
  }
  out << "censored " << result.censored_total << '\n';
  out << "runtime_seconds " << fmt_double(result.seconds) << '\n';
  out << "manifest.begin\n"
      << serialize_manifest(manifest) << "manifest.end\n";
  return out.str();
}

void write_results(const SweepResult& result,
                   const ExperimentManifest& manifest) {
  {
    std::ofstream out(manifest.output_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + manifest.output_path);
    out << results_csv(result);
  }
  {
    std::ofstream out(manifest.output_path + ".summary", std::ios::binary);
    out << results_summary(result, manifest);
  }
}

}  // namespace pzc
