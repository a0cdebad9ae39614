#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pzc/audit.hpp"
#include "pzc/harness.hpp"

namespace {

int print_reports(const std::vector<pzc::AuditReport>& reports) {
  int failures = 0;
  for (const auto& r : reports) {
    std::printf("%-5s %-12s %-28s samples=%-9llu worst=%-13.6g bound=%-13.6g %.2fs\n",
                r.pass ? "pass" : "FAIL", r.suite.c_str(), r.name.c_str(),
                static_cast<unsigned long long>(r.samples), r.worst, r.bound,
                r.seconds);
    if (!r.pass) ++failures;
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hard-instance testbed for stochastic first-order methods"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand(
      "verify", "run certificate audit suites and report pass/fail");
  std::vector<std::string> suite_names;
  double budget = 1.0;
  std::uint64_t seed = 2024;
  verify->add_option("--suite", suite_names,
                     "suite names (default: all); one or more of: kernels "
                     "chain theta variance mss walker active compression "
                     "quad fd");
  verify->add_option("--budget", budget, "sample budget scale (default 1.0)");
  verify->add_option("--seed", seed, "audit seed");

  // run / sweep
  auto* runcmd = app.add_subcommand("run", "execute one experiment (first grid point)");
  auto* sweep = app.add_subcommand("sweep", "execute the full eps grid and fit the scaling law");
  std::string manifest_path;
  runcmd->add_option("--manifest", manifest_path, "manifest file")->required();
  std::string sweep_manifest_path;
  sweep->add_option("--manifest", sweep_manifest_path, "manifest file")->required();

  // lemma1: walker hitting-time simulation
  auto* lemma1 = app.add_subcommand(
      "lemma1", "greedy-walker hitting time vs the certified threshold");
  int l1_T = 20, l1_trials = 1000;
  double l1_p = 0.05, l1_delta = 0.1;
  std::uint64_t l1_seed = 2024;
  lemma1->add_option("--T", l1_T, "chain length");
  lemma1->add_option("--p", l1_p, "release probability");
  lemma1->add_option("--delta", l1_delta, "failure probability");
  lemma1->add_option("--trials", l1_trials, "number of runs");
  lemma1->add_option("--seed", l1_seed, "simulation seed");

  // active: exhaustive seed-map equivalence
  auto* active = app.add_subcommand(
      "active", "exhaustive equivalence check of the finite-sum seed map");
  int a_N = 3, a_T = 3;
  active->add_option("--N", a_N, "summands per coordinate")->required();
  active->add_option("--T", a_T, "chain length")->required();

  // dim: required ambient dimension
  auto* dim = app.add_subcommand(
      "dim", "ambient dimension required by the rotated construction");
  double d_K = 1, d_T = 4, d_p = 0.25, d_delta = 0.5, d_R = 0.0;
  dim->add_option("--K", d_K, "batch size")->required();
  dim->add_option("--T", d_T, "chain length")->required();
  dim->add_option("--p", d_p, "release probability")->required();
  dim->add_option("--delta", d_delta, "failure probability")->required();
  dim->add_option("--R", d_R, "query norm bound (default 230*sqrt(T))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*verify) {
      std::vector<pzc::SuiteId> suites;
      if (suite_names.empty()) {
        suites = pzc::all_suites();
      } else {
        for (const auto& name : suite_names)
          suites.push_back(pzc::suite_from_string(name));
      }
      int failures = 0;
      for (const auto id : suites) {
        failures += print_reports(pzc::run_suite(id, budget, seed));
      }
      std::printf("verify: %s\n", failures == 0 ? "all checks passed"
                                                : "CHECKS FAILED");
      return failures == 0 ? 0 : 1;
    }

    if (*runcmd || *sweep) {
      const auto manifest = pzc::load_manifest_file(
          *runcmd ? manifest_path : sweep_manifest_path);
      const auto result = *runcmd ? pzc::run_single(manifest)
                                  : pzc::run_sweep(manifest);
      pzc::write_results(result, manifest);
      std::fputs(pzc::results_summary(result, manifest).c_str(), stdout);
      std::printf("wrote %s and %s.summary\n", manifest.output_path.c_str(),
                  manifest.output_path.c_str());
      return 0;
    }

    if (*lemma1) {
      const auto res =
          pzc::hitting_time_sim(l1_T, l1_p, l1_delta, l1_trials, l1_seed);
      const double margin = 3.0 * std::sqrt(l1_delta / l1_trials);
      std::printf("threshold_rounds %.0f\n", res.threshold_rounds);
      std::printf("failure_rate %.6g\n", res.failure_rate);
      std::printf("failure_bound %.6g\n", l1_delta + margin);
      std::printf("mean_hitting_time %.6g\n", res.mean_hitting_time);
      std::printf("expected_mean %.6g\n", l1_T / l1_p);
      const bool ok = res.failure_rate <= l1_delta + margin;
      std::printf("%s\n", ok ? "pass" : "FAIL");
      return ok ? 0 : 1;
    }

    if (*active) {
      const auto res = pzc::active_equivalence(a_N, a_T);
      std::printf("seeds %llu\n", static_cast<unsigned long long>(res.seeds));
      std::printf("worst_pattern_count_error %llu\n",
                  static_cast<unsigned long long>(res.worst_count_err));
      std::printf("worst_marginal_error %llu\n",
                  static_cast<unsigned long long>(res.worst_marginal_err));
      std::printf("%s\n", res.pass ? "pass" : "FAIL");
      return res.pass ? 0 : 1;
    }

    if (*dim) {
      const double d = pzc::required_dimension(d_K, d_T, d_p, d_delta, d_R);
      std::printf("required_dimension %.0f\n", d);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
