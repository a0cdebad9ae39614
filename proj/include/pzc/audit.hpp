#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pzc/oracles.hpp"
#include "pzc/transforms.hpp"

namespace pzc {

// One executable check: pass iff worst observed value stays within the
// certified bound (plus the stated tolerance).
struct AuditReport {
  std::string suite;
  std::string name;
  std::uint64_t samples = 0;
  double worst = 0.0;
  double bound = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

// Check suites, named by what they verify. Each turns one certified claim
// of the construction into a sampled or exhaustive audit.
enum class SuiteId {
  KernelBounds,    // kernel/derivative sup-norms, plateaus, normalization
  ChainFunction,   // gap, gradient bounds, smoothness, zero-chain, large-grad
  ThetaGate,       // smoothed-indicator gradient bounds and Lipschitz limits
  EstimatorVariance,  // unbiasedness, variance, zero-chain for all estimators
  EstimatorMss,    // mean-squared smoothness ratios + discontinuity witness
  Walker,          // hitting-time law of the greedy prober
  ActiveOracle,    // seed-map equivalence and increment rates
  Compression,     // soft projection bounds, compressed instance certificate
  Quadratic,       // quadratic estimation instance exactness
  FiniteDiff,      // analytic gradients vs central finite differences
};

std::vector<SuiteId> all_suites();
std::string to_string(SuiteId id);
SuiteId suite_from_string(const std::string& name);

// Runs one suite. budget_scale multiplies the default sample counts
// (1.0 reproduces the certified budgets); reports are reproducible from
// (suite, budget_scale, seed).
std::vector<AuditReport> run_suite(SuiteId id, double budget_scale,
                                   std::uint64_t seed);

// Max over points and coordinates of |central-FD - analytic| / (1 + |analytic|).
double fd_gradient_check(const std::function<double(const Point&)>& value,
                         const std::function<Point(const Point&)>& gradient,
                         const std::vector<Point>& points, double h);

struct HittingTimeResult {
  double failure_rate = 0.0;      // fraction of runs finishing within the cutoff
  double mean_hitting_time = 0.0; // over runs that finished at all
  double threshold_rounds = 0.0;  // floor((T - log(1/delta)) / (2p))
  int trials = 0;
};

// Monte Carlo check of the walker's hitting-time law: the fraction of runs
// reaching full progress within the threshold must stay below delta (plus
// sampling margin).
HittingTimeResult hitting_time_sim(int T, double p, double delta, int trials,
                                   std::uint64_t seed);

struct ActiveEquivalenceResult {
  bool pass = false;
  std::uint64_t seeds = 0;          // N^T
  std::uint64_t worst_count_err = 0;  // max |count(b) - (N-1)^{#zeros(b)}|
  std::uint64_t worst_marginal_err = 0;  // max_j |ones_j - N^{T-1}|
};

// Exhaustive enumeration of zeta o pi: the multiset of bit patterns must
// match the product law exactly (count of pattern b is (N-1)^{#zeros}), and
// each bit must light up for exactly N^{T-1} seeds, for any permutation.
ActiveEquivalenceResult active_equivalence(int N, int T);

// Exact two-point expectation E_z||g(x,z) - g(y,z)||^2 for the boundary
// witness x = (1, 1/4 - delta, 0), y on the clean side of the threshold.
// The value stays bounded below by (1-p) Phi'(1/4)^2 as delta -> 0, which
// is the failure of mean-squared smoothness for the hard-gated estimator.
std::vector<std::pair<double, double>> mss_witness(double p);

// Same witness pair evaluated under the smooth-gated estimator, as a ratio
// against ||x - y||^2; stays bounded by 328^2 / p.
std::vector<std::pair<double, double>> mss_witness_smooth(double p);

}  // namespace pzc
