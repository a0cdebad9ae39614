#include <doctest.h>

#include <cmath>

#include "pzc/harness.hpp"

using namespace pzc;

namespace {

ExperimentManifest tiny_sgd_manifest() {
  ExperimentManifest m;
  m.instance.kind = InstanceKind::ZrBv;
  m.instance.delta = 5900.0;
  m.instance.smoothness = 1.0;
  m.instance.sigma2 = 2116.0;
  m.solver.kind = SolverKind::Sgd;
  m.solver.step = 1.0;
  m.solver.max_rounds = 30000;
  m.eps_grid = {0.4, 0.2};
  m.trials = 3;
  m.master_seed = 31;
  m.output_path = "tiny.csv";
  return m;
}

}  // namespace

TEST_CASE("fit_scaling") {
  // exact quartic law in log-log space
  std::vector<std::pair<double, double>> quartic;
  for (double x = 0.0; x < 2.0; x += 0.4) quartic.emplace_back(x, 4.0 * x + 1.0);
  const ScalingFit fit = fit_scaling(quartic);
  CHECK(fit.slope == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.stderr_slope <= 1e-12);

  // constant queries: slope zero
  std::vector<std::pair<double, double>> flat = {{0.0, 2.0}, {1.0, 2.0}, {2.0, 2.0}};
  CHECK(fit_scaling(flat).slope == 0.0);

  // two points pin the line
  std::vector<std::pair<double, double>> two = {{0.0, 0.0}, {1.0, 3.0}};
  CHECK(fit_scaling(two).slope == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS(fit_scaling({{1.0, 1.0}}));
  CHECK_THROWS(fit_scaling({{1.0, 1.0}, {1.0, 2.0}}));  // degenerate abscissae
}

TEST_CASE("manifest round trip is lossless") {
  ExperimentManifest m = tiny_sgd_manifest();
  m.solver.step_coeff = 12.5;
  m.eps_grid = {0.4, 0.28, 0.2, 0.14, 0.1};
  const std::string text = serialize_manifest(m);
  const ExperimentManifest back = parse_manifest(text);
  CHECK(serialize_manifest(back) == text);
  CHECK(back.instance.delta == m.instance.delta);
  CHECK(back.eps_grid == m.eps_grid);
  CHECK(back.master_seed == m.master_seed);
  CHECK(back.solver.step_coeff == 12.5);
}

TEST_CASE("manifest validation") {
  ExperimentManifest m = tiny_sgd_manifest();
  m.eps_grid = {0.1, 0.2};  // must strictly decrease
  CHECK_THROWS(parse_manifest(serialize_manifest(m)));
  m.eps_grid = {0.2, 0.1};
  m.trials = 0;
  CHECK_THROWS(parse_manifest(serialize_manifest(m)));
  CHECK_THROWS(parse_manifest("not a manifest"));
  CHECK_THROWS(parse_manifest("pzc-manifest 1\nbogus.key 3\n"));
}

TEST_CASE("sweep rows are deterministic and rerunnable") {
  const ExperimentManifest m = tiny_sgd_manifest();
  const SweepResult r1 = run_sweep(m);
  const SweepResult r2 = run_sweep(m);
  CHECK(results_csv(r1) == results_csv(r2));
  CHECK(r1.rows.size() == m.eps_grid.size() * m.trials);
  // rows are ordered by (eps index, trial)
  CHECK(r1.rows[0].eps == 0.4);
  CHECK(r1.rows[0].trial == 0);
  CHECK(r1.rows.back().eps == 0.2);
  // all these short runs finish
  for (const auto& row : r1.rows) {
    CHECK(!row.censored);
    CHECK(row.queries > 0);
    CHECK(row.queries == row.rounds);  // K = 1
    CHECK(row.final_grad_norm <= row.eps);
    CHECK(row.lower_bound_rounds > 0.0);
  }
}

TEST_CASE("summary embeds the manifest for replay") {
  const ExperimentManifest m = tiny_sgd_manifest();
  const SweepResult r = run_single(m);
  const std::string summary = results_summary(r, m);
  CHECK(summary.find("manifest.begin") != std::string::npos);
  CHECK(summary.find(serialize_manifest(m)) != std::string::npos);
  CHECK(summary.find("version ") != std::string::npos);
  // single runs only carry the first grid point
  CHECK(r.rows.size() == static_cast<std::size_t>(m.trials));
}

TEST_CASE("csv layout") {
  const ExperimentManifest m = tiny_sgd_manifest();
  const SweepResult r = run_single(m);
  const std::string csv = results_csv(r);
  CHECK(csv.rfind("eps,trial,seed,queries,final_grad_norm\n", 0) == 0);
  // one line per row plus header
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == static_cast<long>(r.rows.size()) + 1);
}

TEST_CASE("solver kind names") {
  CHECK(solver_kind_from_string("sgd") == SolverKind::Sgd);
  CHECK(solver_kind_from_string("spider") == SolverKind::Spider);
  CHECK(solver_kind_from_string("walker") == SolverKind::Walker);
  CHECK_THROWS(solver_kind_from_string("adam"));
}
