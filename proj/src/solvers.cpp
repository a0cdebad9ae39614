#include "pzc/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace pzc {

namespace {

class SgdAlgorithm final : public Algorithm {
 public:
  SgdAlgorithm(double step, int budget_rounds, std::uint64_t run_seed, int dim)
      : step_(step), budget_(budget_rounds), x_(Point::Zero(dim)) {
    CounterRng rng(derive_key(run_seed, 0x736764ULL));
    report_round_ = 1 + static_cast<int>(rng.next_below(
                            static_cast<std::uint64_t>(budget_rounds)));
  }

  int batch_size() const override { return 1; }

  std::vector<Point> next_batch(int, CounterRng&) override {
    ++round_;
    if (round_ > budget_) {
      reporting_ = true;
      return {report_point_};
    }
    if (round_ == report_round_) report_point_ = x_;
    return {x_};
  }

  void observe(const std::vector<OracleResponse>& responses) override {
    if (!reporting_) x_ -= step_ * responses.front().gradient;
  }

  bool finished() const override { return reporting_; }

 private:
  double step_;
  int budget_;
  int round_ = 0;
  int report_round_ = 0;
  bool reporting_ = false;
  Point x_;
  Point report_point_;
};

class SpiderAlgorithm final : public Algorithm {
 public:
  SpiderAlgorithm(const SpiderConfig& config, const StochasticOracle& instance,
                  int dim)
      : x_(Point::Zero(dim)),
        x_prev_(Point::Zero(dim)),
        v_(Point::Zero(dim)) {
    const double sigma = std::sqrt(instance.certificate().variance_bound);
    const double lbar = instance.certificate().mss > 0.0
                            ? instance.certificate().mss
                            : instance.certificate().smoothness;
    const double eps = config.eps_target;
    epoch_ = config.epoch_length > 0
                 ? config.epoch_length
                 : std::max(1, static_cast<int>(std::ceil(sigma / eps)));
    const double full_batch = std::ceil(sigma * sigma / (eps * eps));
    restart_rounds_ =
        config.restart_rounds > 0
            ? config.restart_rounds
            : std::max(1, static_cast<int>(std::min<double>(full_batch,
                                                            1.0 * epoch_)));
    step_ = config.step_norm > 0.0 ? config.step_norm : eps / lbar;
  }

  int batch_size() const override { return 2; }

  std::vector<Point> next_batch(int, CounterRng&) override {
    if (since_restart_ < 0) return {x_, x_};  // averaging a fresh estimate
    return {x_, x_prev_};
  }

  void observe(const std::vector<OracleResponse>& responses) override {
    if (since_restart_ < 0) {
      restart_acc_ += responses.front().gradient;
      ++restart_seen_;
      if (restart_seen_ == restart_rounds_) {
        v_ = restart_acc_ / restart_seen_;
        since_restart_ = 0;
        move();
      }
      return;
    }
    v_ += responses[0].gradient - responses[1].gradient;
    ++since_restart_;
    if (since_restart_ >= epoch_) begin_restart();
    else move();
  }

 private:
  void move() {
    x_prev_ = x_;
    const double norm = v_.norm();
    if (norm > 0.0) x_ -= (step_ / norm) * v_;
  }

  void begin_restart() {
    since_restart_ = -1;
    restart_seen_ = 0;
    restart_acc_ = Point::Zero(x_.size());
  }

  int epoch_ = 1;
  int restart_rounds_ = 1;
  double step_ = 0.0;
  int since_restart_ = -1;  // negative while averaging a restart estimate
  int restart_seen_ = 0;
  Point x_, x_prev_, v_;
  Point restart_acc_;
};

class WalkerAlgorithm final : public Algorithm {
 public:
  explicit WalkerAlgorithm(const StochasticOracle& instance)
      : lambda_(instance.geometry().lambda),
        dim_(instance.dimension()),
        active_(instance.seed_distribution().kind() ==
                SeedDistribution::Kind::FiniteSum),
        seed_space_(active_ ? instance.seed_distribution().atom_count() : 0) {}

  int batch_size() const override { return 1; }

  std::vector<Point> next_batch(int dim, CounterRng&) override {
    Point x = Point::Zero(dim);
    for (int i = 0; i < discovered_; ++i) x[i] = lambda_;
    if (discovered_ >= dim_) done_ = true;  // full-support query issued
    return {x};
  }

  void observe(const std::vector<OracleResponse>& responses) override {
    const int prog = progress(responses.front().gradient, kZeroTol);
    if (prog > discovered_) {
      discovered_ = prog;
      ++increments_;
    }
  }

  std::optional<Seed> choose_seed(CounterRng&) override {
    if (!active_) return std::nullopt;
    // fresh index per round; wraps only after exhausting the seed space
    std::uint64_t k = next_index_++;
    return Seed{(k % seed_space_) + 1};
  }

  bool finished() const override { return done_; }

  int discovered() const { return discovered_; }
  int increments() const { return increments_; }

 private:
  double lambda_;
  int dim_;
  bool active_;
  std::uint64_t seed_space_;
  std::uint64_t next_index_ = 0;
  int discovered_ = 0;
  int increments_ = 0;
  bool done_ = false;
};

MeasuredRun run_measured(Algorithm& alg, const StochasticOracle& instance,
                         double eps, int max_rounds, std::uint64_t run_seed) {
  MeasuredRun mr;
  run_streaming(alg, instance, max_rounds, run_seed,
                [&](int round, const TraceRound& tr) {
                  mr.rounds = round;
                  const double norm =
                      instance.mean_gradient(tr.batch.front()).norm();
                  mr.final_grad_norm = norm;
                  if (norm <= eps) {
                    mr.stationarity_round = round;
                    return false;
                  }
                  return true;
                });
  return mr;
}

double resolve_sgd_step(const SgdConfig& config,
                        const StochasticOracle& instance) {
  if (config.step > 0.0) return config.step;
  const auto& cert = instance.certificate();
  const double L = cert.smoothness;
  double step = 1.0 / L;
  if (cert.variance_bound > 0.0) {
    const double tuned =
        std::sqrt(2.0 * cert.delta_bound /
                  (L * cert.variance_bound * config.max_rounds));
    if (tuned < step) step = tuned;
  }
  return step;
}

}  // namespace

Trace sgd(const SgdConfig& config, const StochasticOracle& instance,
          std::uint64_t run_seed) {
  if (config.max_rounds < 1)
    throw std::invalid_argument("sgd: max_rounds must be >= 1");
  SgdAlgorithm alg(resolve_sgd_step(config, instance), config.max_rounds,
                   run_seed, instance.dimension());
  return run(alg, instance, config.max_rounds + 1, run_seed);
}

Trace spider(const SpiderConfig& config, const StochasticOracle& instance,
             std::uint64_t run_seed) {
  if (config.max_rounds < 1)
    throw std::invalid_argument("spider: max_rounds must be >= 1");
  SpiderAlgorithm alg(config, instance, instance.dimension());
  return run(alg, instance, config.max_rounds, run_seed);
}

Trace greedy_chain_walker(const StochasticOracle& instance, int max_rounds,
                          std::uint64_t run_seed) {
  WalkerAlgorithm alg(instance);
  return run(alg, instance, max_rounds, run_seed);
}

MeasuredRun sgd_measured(const SgdConfig& config,
                         const StochasticOracle& instance, double eps,
                         std::uint64_t run_seed) {
  SgdAlgorithm alg(resolve_sgd_step(config, instance), config.max_rounds,
                   run_seed, instance.dimension());
  return run_measured(alg, instance, eps, config.max_rounds + 1, run_seed);
}

MeasuredRun spider_measured(const SpiderConfig& config,
                            const StochasticOracle& instance, double eps,
                            std::uint64_t run_seed) {
  SpiderAlgorithm alg(config, instance, instance.dimension());
  return run_measured(alg, instance, eps, config.max_rounds, run_seed);
}

int walker_hitting_time(const StochasticOracle& instance, int max_rounds,
                        std::uint64_t run_seed) {
  WalkerAlgorithm alg(instance);
  int hit = 0;
  run_streaming(alg, instance, max_rounds, run_seed,
                [&](int round, const TraceRound&) {
                  if (alg.discovered() >= instance.dimension()) {
                    hit = round;
                    return false;
                  }
                  return true;
                });
  return hit;
}

WalkerStats walker_stats(const StochasticOracle& instance, int max_rounds,
                         std::uint64_t run_seed) {
  WalkerAlgorithm alg(instance);
  WalkerStats stats;
  run_streaming(alg, instance, max_rounds, run_seed,
                [&](int round, const TraceRound&) {
                  stats.rounds = round;
                  return alg.discovered() < instance.dimension();
                });
  stats.increments = alg.increments();
  return stats;
}

}  // namespace pzc
