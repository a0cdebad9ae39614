#pragma once

#include <cstdint>

#include "pzc/protocol.hpp"

namespace pzc {

struct SgdConfig {
  double step = 0.0;      // <= 0: min{1/L, sqrt(2 Delta / (L sigma^2 N))}
  int max_rounds = 1000;  // budget N; one extra reporting round is appended
};

// Plain stochastic gradient descent from x0 = 0 (K = 1). The reported
// output point is a uniformly random iterate (index fixed by run_seed),
// re-queried in slot 1 of a final reporting round.
Trace sgd(const SgdConfig& config, const StochasticOracle& instance,
          std::uint64_t run_seed);

struct SpiderConfig {
  double eps_target = 0.1;  // drives the default epoch length and step
  int epoch_length = 0;     // 0: ceil(sigma / eps)
  int restart_rounds = 0;   // 0: ceil(sigma^2 / eps^2), at most one epoch
  double step_norm = 0.0;   // 0: eps / Lbar (normalized step length)
  int max_rounds = 1000;
};

// K = 2 recursive variance-reduced method: each round queries (x_t, x_{t-1})
// under one shared seed and updates v <- v + g(x_t,z) - g(x_{t-1},z), with
// periodic averaged restarts. Moves are normalized: x <- x - step_norm * v/|v|.
Trace spider(const SpiderConfig& config, const StochasticOracle& instance,
             std::uint64_t run_seed);

// Maximal-progress zero-respecting prober: queries the point with entries
// lambda on every discovered coordinate, which keeps the next link's noisy
// coordinate active until it is revealed. Against a finite-sum (active)
// instance it supplies fresh seed indices 1, 2, 3, ...
Trace greedy_chain_walker(const StochasticOracle& instance, int max_rounds,
                          std::uint64_t run_seed);

// Streaming run for sweeps: stops at the first round whose slot-1 query is
// eps-stationary under the exact mean gradient, without storing a trace.
struct MeasuredRun {
  int rounds = 0;              // rounds actually executed
  int stationarity_round = 0;  // 1-based, 0 if never reached
  double final_grad_norm = 0.0;
};

MeasuredRun sgd_measured(const SgdConfig& config,
                         const StochasticOracle& instance, double eps,
                         std::uint64_t run_seed);
MeasuredRun spider_measured(const SpiderConfig& config,
                            const StochasticOracle& instance, double eps,
                            std::uint64_t run_seed);

// Streaming walker for simulations: returns the 1-based round at which the
// progress hit T, or 0 if it never did within max_rounds.
int walker_hitting_time(const StochasticOracle& instance, int max_rounds,
                        std::uint64_t run_seed);

// Walker rounds taken and progress increments observed (for the active
// oracle increment-rate audit).
struct WalkerStats {
  int rounds = 0;
  int increments = 0;
};
WalkerStats walker_stats(const StochasticOracle& instance, int max_rounds,
                         std::uint64_t run_seed);

}  // namespace pzc
