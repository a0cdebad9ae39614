#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pzc/oracles.hpp"

namespace pzc {

struct OracleResponse {
  double value = 0.0;
  Point gradient;
};

// One protocol round: a batch of K queries answered under one shared seed.
struct TraceRound {
  std::vector<Point> batch;
  Seed seed;
  std::vector<OracleResponse> responses;
};

// Complete replayable history of one run.
struct Trace {
  std::vector<TraceRound> rounds;
  std::uint64_t run_seed = 0;
  std::string manifest;  // instance manifest reference, may be empty
};

// Adaptive querying interface. The algorithm sees only its own seed stream
// and the previous oracle responses; the oracle's per-round seeds live in a
// separate stream keyed by (run_seed, round), so a batch shares one draw by
// construction.
class Algorithm {
 public:
  virtual ~Algorithm() = default;

  virtual int batch_size() const = 0;

  // Queries for the next round. dim is the instance dimension, rng the
  // algorithm's private seed stream.
  virtual std::vector<Point> next_batch(int dim, CounterRng& rng) = 0;

  // Feed back the oracle responses for the batch just issued.
  virtual void observe(const std::vector<OracleResponse>& responses) = 0;

  virtual bool finished() const { return false; }

  // Active-oracle protocol: the algorithm supplies the seed itself.
  // Returning nullopt lets the protocol draw from the instance law.
  virtual std::optional<Seed> choose_seed(CounterRng& rng) {
    (void)rng;
    return std::nullopt;
  }
};

// Runs the protocol and materializes the full trace. Pure function of
// (algorithm, instance, run_seed): identical seeds give bit-identical
// traces.
Trace run(Algorithm& algorithm, const StochasticOracle& instance,
          int max_rounds, std::uint64_t run_seed);

// Streaming variant for long runs where storing the trace is wasteful; the
// callback sees each completed round and returns false to stop early.
using RoundCallback = std::function<bool(int round, const TraceRound&)>;
void run_streaming(Algorithm& algorithm, const StochasticOracle& instance,
                   int max_rounds, std::uint64_t run_seed,
                   const RoundCallback& callback);

struct ZeroRespectViolation {
  int round = 0;  // 1-based
  int slot = 0;   // 1-based batch position
  int coord = 0;  // 1-based coordinate
};

// Empty iff every query's support is contained in the union of supports of
// all previous responses (threshold kZeroTol).
std::vector<ZeroRespectViolation> zero_respecting_audit(const Trace& trace);

// First 1-based round whose first batch point is eps-stationary under the
// instance's exact mean gradient, or nullopt if none.
std::optional<int> stationarity_time(const Trace& trace,
                                     const StochasticOracle& instance,
                                     double eps);

// Per-round running max of the queries' progress. Raw queries use the
// exact-zero threshold; when the geometry carries a rotation the progress
// is measured on U^T rho(x / lambda) with threshold 1/4 (coordinates of a
// rotated query are never exactly zero).
std::vector<int> progress_curve(const Trace& trace,
                                const InstanceGeometry& geometry = {});

// Line-oriented trace codec; doubles are stored as hex floats so replay is
// bit-exact across versions.
void save_trace(const Trace& trace, std::ostream& out);
Trace load_trace(std::istream& in);

}  // namespace pzc
