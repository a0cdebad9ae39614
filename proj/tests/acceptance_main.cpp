// Acceptance suite: runs every certified claim of the construction at its
// stated budget and tolerance and prints one pass/fail line per criterion.
// Exit code 0 iff everything holds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pzc/audit.hpp"
#include "pzc/harness.hpp"
#include "pzc/protocol.hpp"
#include "pzc/solvers.hpp"

using namespace pzc;

namespace {

int g_failures = 0;

struct Criterion {
  std::string name;
  std::vector<std::string> problems;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  explicit Criterion(std::string n) : name(std::move(n)) {}

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }

  void require_reports(const std::vector<AuditReport>& reports) {
    for (const auto& r : reports) {
      if (!r.pass) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s/%s worst=%g bound=%g",
                      r.suite.c_str(), r.name.c_str(), r.worst, r.bound);
        problems.push_back(buf);
      }
    }
  }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }

  void finish(double budget_seconds) {
    const double t = seconds();
    if (t > budget_seconds) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "runtime %.1fs exceeds budget %.0fs", t,
                    budget_seconds);
      problems.push_back(buf);
    }
    if (problems.empty()) {
      std::printf("[PASS] %s (%.1fs)\n", name.c_str(), t);
    } else {
      ++g_failures;
      std::printf("[FAIL] %s (%.1fs)\n", name.c_str(), t);
      for (const auto& p : problems) std::printf("       - %s\n", p.c_str());
    }
    std::fflush(stdout);
  }
};

constexpr std::uint64_t kSeed = 2024;

ExperimentManifest sgd_sweep_manifest() {
  ExperimentManifest m;
  m.instance.kind = InstanceKind::ZrBv;
  m.instance.delta = 5900.0;
  m.instance.smoothness = 1.0;
  m.instance.sigma2 = 211600.0;
  m.instance.seed = 1;
  m.solver.kind = SolverKind::Sgd;
  m.solver.step = 1.0;
  m.solver.max_rounds = 4000000;
  m.eps_grid = {0.4, 0.28, 0.2, 0.14, 0.1};
  m.trials = 5;
  m.master_seed = 7;
  m.output_path = "acceptance_sgd.csv";
  return m;
}

ExperimentManifest spider_sweep_manifest() {
  ExperimentManifest m;
  m.instance.kind = InstanceKind::ZrMss;
  m.instance.delta = 70000.0;
  m.instance.smoothness = 1.0;
  m.instance.sigma2 = 160000.0;
  m.instance.seed = 1;
  m.solver.kind = SolverKind::Spider;
  m.solver.step_norm = 9.0;
  m.solver.max_rounds = 20000000;
  m.eps_grid = {0.09, 0.063, 0.045, 0.0315, 0.0252};
  m.trials = 7;
  m.master_seed = 101;
  m.output_path = "acceptance_spider.csv";
  return m;
}

// fraction of rows (per grid point) whose stationarity round exceeds the
// instance's certified (T-1)/(2p)
void check_lower_bound_margin(Criterion& c, const ExperimentManifest& m,
                              const SweepResult& r) {
  for (std::size_t e = 0; e < m.eps_grid.size(); ++e) {
    int above = 0;
    for (int t = 0; t < m.trials; ++t) {
      const TrialRow& row = r.rows[e * m.trials + t];
      if (row.rounds > row.lower_bound_rounds) ++above;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "eps=%g: only %d/%d seeds beat the certified round count",
                  m.eps_grid[e], above, m.trials);
    c.require(2 * above >= m.trials, buf);
  }
}

}  // namespace

int main() {
  std::printf("acceptance suite, %s\n", version_string());

  {
    Criterion c("criterion 1: hard-function certificate at T=25, 1e6 samples");
    c.require_reports(run_suite(SuiteId::ChainFunction, 1.0, kSeed));
    c.finish(60.0);
  }
  {
    Criterion c("criterion 2: kernel/derivative bound grids, 1e6 points");
    c.require_reports(run_suite(SuiteId::KernelBounds, 1.0, kSeed));
    c.finish(30.0);
  }
  {
    Criterion c(
        "criterion 3: estimator certificates + zero-chain audit, 1e6 pairs");
    c.require_reports(run_suite(SuiteId::EstimatorVariance, 1.0, kSeed));
    c.finish(120.0);
  }
  {
    Criterion c("criterion 4: mean-squared smoothness + boundary witness");
    c.require_reports(run_suite(SuiteId::EstimatorMss, 1.0, kSeed));
    // the gate-gradient bounds feed the stat-estimator certificate
    c.require_reports(run_suite(SuiteId::ThetaGate, 1.0, kSeed));
    c.finish(120.0);
  }
  {
    Criterion c("criterion 5: walker hitting time, 1e3 trials");
    const auto res = hitting_time_sim(20, 0.05, 0.1, 1000, kSeed);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "failure rate %.4f exceeds 0.13",
                  res.failure_rate);
    c.require(res.failure_rate <= 0.1 + 3.0 * std::sqrt(0.1 / 1000.0), buf);
    const double se = std::sqrt(20.0 * 0.95) / 0.05 / std::sqrt(1000.0);
    std::snprintf(buf, sizeof(buf), "mean %.2f not within 3 SE of 400",
                  res.mean_hitting_time);
    c.require(std::abs(res.mean_hitting_time - 400.0) <= 3.0 * se, buf);
    c.finish(60.0);
  }
  {
    Criterion c("criterion 6: active-oracle equivalence + increment rate");
    const auto eq = active_equivalence(3, 3);
    c.require(eq.pass && eq.seeds == 27,
              "exhaustive pattern counts at N=3, T=3 are off");
    c.require_reports(run_suite(SuiteId::ActiveOracle, 1.0, kSeed));
    c.finish(120.0);
  }
  {
    Criterion c("criterion 7: query-complexity scaling laws");
    const ExperimentManifest sgd_m = sgd_sweep_manifest();
    const SweepResult sgd_r = run_sweep(sgd_m);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "sgd slope %.3f outside [3.5, 4.5] (stderr %.3f)",
                  sgd_r.fit.slope, sgd_r.fit.stderr_slope);
    c.require(sgd_r.fit.slope >= 3.5 && sgd_r.fit.slope <= 4.5, buf);
    c.require(sgd_r.censored_total == 0, "sgd sweep had censored runs");
    check_lower_bound_margin(c, sgd_m, sgd_r);

    const ExperimentManifest sp_m = spider_sweep_manifest();
    const SweepResult sp_r = run_sweep(sp_m);
    std::snprintf(buf, sizeof(buf),
                  "spider slope %.3f outside [2.5, 3.5] (stderr %.3f)",
                  sp_r.fit.slope, sp_r.fit.stderr_slope);
    c.require(sp_r.fit.slope >= 2.5 && sp_r.fit.slope <= 3.5, buf);
    c.require(sp_r.censored_total == 0, "spider sweep had censored runs");
    check_lower_bound_margin(c, sp_m, sp_r);
    std::printf("       sgd slope %.3f, spider slope %.3f\n", sgd_r.fit.slope,
                sp_r.fit.slope);
    c.finish(900.0);
  }
  {
    Criterion c("criterion 8: finite-difference cross-checks at 1e-4");
    c.require_reports(run_suite(SuiteId::FiniteDiff, 1.0, kSeed));
    c.finish(60.0);
  }
  {
    Criterion c("criterion 9: quadratic estimation instance exactness");
    c.require_reports(run_suite(SuiteId::Quadratic, 1.0, kSeed));
    c.require_reports(run_suite(SuiteId::Compression, 1.0, kSeed));
    c.finish(60.0);
  }
  {
    Criterion c("criterion 10: manifest replay is bit-exact");
    ExperimentManifest m = sgd_sweep_manifest();
    m.eps_grid = {0.4, 0.2};
    m.trials = 3;
    m.solver.max_rounds = 200000;
    m.output_path = "acceptance_replay.csv";
    const SweepResult first = run_sweep(m);
    write_results(first, m);
    // reload the manifest from disk the way a fresh run would
    std::ofstream mf("acceptance_replay.manifest", std::ios::binary);
    mf << serialize_manifest(m);
    mf.close();
    const ExperimentManifest reloaded =
        load_manifest_file("acceptance_replay.manifest");
    const SweepResult second = run_sweep(reloaded);
    c.require(results_csv(first) == results_csv(second),
              "rerun produced different CSV bytes");
    std::ifstream written(m.output_path, std::ios::binary);
    std::ostringstream disk;
    disk << written.rdbuf();
    c.require(disk.str() == results_csv(second),
              "written CSV differs from the rerun");
    c.finish(120.0);
  }

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
