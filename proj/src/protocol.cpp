#include "pzc/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pzc {

namespace {

constexpr std::uint64_t kAlgStream = 0x616c67ULL;     // algorithm seed stream
constexpr std::uint64_t kOracleStream = 0x6f7263ULL;  // oracle seed streams

}  // namespace

void run_streaming(Algorithm& algorithm, const StochasticOracle& instance,
                   int max_rounds, std::uint64_t run_seed,
                   const RoundCallback& callback) {
  const int dim = instance.dimension();
  CounterRng alg_rng(derive_key(run_seed, kAlgStream));
  const std::uint64_t oracle_root = derive_key(run_seed, kOracleStream);
  for (int t = 1; t <= max_rounds; ++t) {
    TraceRound round;
    round.batch = algorithm.next_batch(dim, alg_rng);
    if (round.batch.empty() ||
        static_cast<int>(round.batch.size()) != algorithm.batch_size())
      throw std::runtime_error("algorithm produced a wrong-size batch");
    for (const Point& x : round.batch) {
      if (x.size() != dim)
        throw std::invalid_argument("query dimension mismatch");
    }
    // one seed per round, shared across the whole batch; two-level key so
    // round indices cannot collide with other streams keyed off run_seed
    CounterRng oracle_rng(derive_key(oracle_root, static_cast<std::uint64_t>(t)));
    const auto chosen = algorithm.choose_seed(alg_rng);
    round.seed = chosen ? *chosen : instance.seed_distribution().draw(oracle_rng);
    round.responses.reserve(round.batch.size());
    for (const Point& x : round.batch) {
      round.responses.push_back(OracleResponse{
          instance.objective(x), instance.gradient_estimate(x, round.seed)});
    }
    algorithm.observe(round.responses);
    if (!callback(t, round)) return;
    if (algorithm.finished()) return;
  }
}

Trace run(Algorithm& algorithm, const StochasticOracle& instance,
          int max_rounds, std::uint64_t run_seed) {
  Trace trace;
  trace.run_seed = run_seed;
  run_streaming(algorithm, instance, max_rounds, run_seed,
                [&trace](int, const TraceRound& round) {
                  trace.rounds.push_back(round);
                  return true;
                });
  return trace;
}

std::vector<ZeroRespectViolation> zero_respecting_audit(const Trace& trace) {
  std::vector<ZeroRespectViolation> violations;
  std::set<int> seen;  // 1-based coords revealed by previous responses
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const TraceRound& round = trace.rounds[t];
    for (std::size_t k = 0; k < round.batch.size(); ++k) {
      const Point& x = round.batch[k];
      for (int i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > kZeroTol && seen.count(i + 1) == 0) {
          violations.push_back(ZeroRespectViolation{
              static_cast<int>(t + 1), static_cast<int>(k + 1), i + 1});
        }
      }
    }
    for (const OracleResponse& resp : round.responses) {
      for (int i = 0; i < resp.gradient.size(); ++i) {
        if (std::abs(resp.gradient[i]) > kZeroTol) seen.insert(i + 1);
      }
    }
  }
  return violations;
}

std::optional<int> stationarity_time(const Trace& trace,
                                     const StochasticOracle& instance,
                                     double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const Point& x = trace.rounds[t].batch.front();
    if (instance.mean_gradient(x).norm() <= eps)
      return static_cast<int>(t + 1);
  }
  return std::nullopt;
}

std::vector<int> progress_curve(const Trace& trace,
                                const InstanceGeometry& geometry) {
  const bool rotated = geometry.rotation.size() > 0;
  std::vector<int> curve;
  curve.reserve(trace.rounds.size());
  int best = 0;
  for (const TraceRound& round : trace.rounds) {
    for (const Point& x : round.batch) {
      int prog;
      if (rotated) {
        if (x.size() != geometry.rotation.rows())
          throw std::invalid_argument("progress_curve: rotation mismatch");
        const Point y = x / geometry.lambda;
        const double scale =
            1.0 / std::sqrt(1.0 + y.squaredNorm() /
                                      (geometry.radius * geometry.radius));
        const Point inner = geometry.rotation.transpose() * (scale * y);
        prog = progress(inner, 0.25);
      } else {
        prog = progress(x, kZeroTol);
      }
      if (prog > best) best = prog;
    }
    curve.push_back(best);
  }
  return curve;
}

// --------------------------------------------------------------------------
// Trace codec

namespace {

std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

void write_point(std::ostream& out, const Point& x) {
  for (int i = 0; i < x.size(); ++i) out << ' ' << hex_double(x[i]);
}

Point read_point(std::istringstream& in, int dim) {
  Point x(dim);
  std::string tok;
  for (int i = 0; i < dim; ++i) {
    in >> tok;
    x[i] = std::strtod(tok.c_str(), nullptr);
  }
  return x;
}

}  // namespace

void save_trace(const Trace& trace, std::ostream& out) {
  out << "pzc-trace 1\n";
  out << "run_seed " << trace.run_seed << '\n';
  if (!trace.manifest.empty()) {
    std::string one_line = trace.manifest;
    for (char& c : one_line)
      if (c == '\n') c = ';';
    out << "manifest " << one_line << '\n';
  }
  out << "rounds " << trace.rounds.size() << '\n';
  for (const TraceRound& round : trace.rounds) {
    const int dim =
        round.batch.empty() ? 0 : static_cast<int>(round.batch.front().size());
    out << "round k " << round.batch.size() << " dim " << dim << '\n';
    for (const Point& x : round.batch) {
      out << "q";
      write_point(out, x);
      out << '\n';
    }
    if (std::holds_alternative<int>(round.seed)) {
      out << "z bit " << std::get<int>(round.seed) << '\n';
    } else if (std::holds_alternative<BitVector>(round.seed)) {
      out << "z bits ";
      for (auto b : std::get<BitVector>(round.seed)) out << int(b);
      out << '\n';
    } else if (std::holds_alternative<std::uint64_t>(round.seed)) {
      out << "z index " << std::get<std::uint64_t>(round.seed) << '\n';
    } else {
      out << "z real " << hex_double(std::get<double>(round.seed)) << '\n';
    }
    for (const OracleResponse& resp : round.responses) {
      out << "r " << hex_double(resp.value);
      write_point(out, resp.gradient);
      out << '\n';
    }
  }
}

Trace load_trace(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line) || line.rfind("pzc-trace 1", 0) != 0)
    throw std::runtime_error("not a trace file");
  std::size_t n_rounds = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "run_seed") {
      ls >> trace.run_seed;
    } else if (tag == "manifest") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      for (char& c : rest)
        if (c == ';') c = '\n';
      trace.manifest = rest;
    } else if (tag == "rounds") {
      ls >> n_rounds;
      trace.rounds.reserve(n_rounds);
    } else if (tag == "round") {
      std::string kw;
      std::size_t k = 0;
      int dim = 0;
      ls >> kw >> k >> kw >> dim;
      TraceRound round;
      for (std::size_t i = 0; i < k; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated trace");
        std::istringstream qs(line);
        qs >> tag;
        round.batch.push_back(read_point(qs, dim));
      }
      if (!std::getline(in, line)) throw std::runtime_error("truncated trace");
      {
        std::istringstream zs(line);
        std::string kind;
        zs >> tag >> kind;
        if (kind == "bit") {
          int bit;
          zs >> bit;
          round.seed = Seed{bit};
        } else if (kind == "bits") {
          std::string bits;
          zs >> bits;
          BitVector bv(bits.size());
          for (std::size_t j = 0; j < bits.size(); ++j) bv[j] = bits[j] == '1';
          round.seed = Seed{std::move(bv)};
        } else if (kind == "index") {
          std::uint64_t idx;
          zs >> idx;
          round.seed = Seed{idx};
        } else if (kind == "real") {
          std::string tok;
          zs >> tok;
          round.seed = Seed{std::strtod(tok.c_str(), nullptr)};
        } else {
          throw std::runtime_error("bad seed line in trace");
        }
      }
      for (std::size_t i = 0; i < k; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated trace");
        std::istringstream rs(line);
        std::string tok;
        rs >> tok >> tok;
        OracleResponse resp;
        resp.value = std::strtod(tok.c_str(), nullptr);
        resp.gradient = read_point(rs, dim);
        round.responses.push_back(std::move(resp));
      }
      trace.rounds.push_back(std::move(round));
    }
  }
  if (trace.rounds.size() != n_rounds)
    throw std::runtime_error("trace round count mismatch");
  return trace;
}

}  // namespace pzc
