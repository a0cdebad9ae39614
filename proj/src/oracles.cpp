#include "pzc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pzc/kernels.hpp"

namespace pzc {

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > (~std::uint64_t{0}) / base)
      throw std::invalid_argument("seed space size overflows 64 bits");
    out *= base;
  }
  return out;
}

void check_bit(int z) {
  if (z != 0 && z != 1) throw std::invalid_argument("seed bit must be 0 or 1");
}

void check_p(double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("p must be in (0, 1]");
}

}  // namespace

// --------------------------------------------------------------------------
// Permutation

Permutation::Permutation(std::uint64_t n, std::uint64_t key, bool explicit_table)
    : n_(n), key_(key) {
  if (n == 0) throw std::invalid_argument("Permutation: empty domain");
  int bits = 1;
  while ((std::uint64_t{1} << bits) < n && bits < 62) ++bits;
  half_bits_ = (bits + 1) / 2;
  if (explicit_table) {
    auto table = std::make_shared<std::vector<std::uint64_t>>(n);
    std::iota(table->begin(), table->end(), std::uint64_t{0});
    if (key != 0) {
      CounterRng rng(key);
      for (std::uint64_t i = n - 1; i > 0; --i) {
        std::swap((*table)[i], (*table)[rng.next_below(i + 1)]);
      }
    }
    table_ = std::move(table);
  }
}

Permutation Permutation::identity(std::uint64_t n) {
  return Permutation(n, 0, n <= kExplicitCutoff);
}

Permutation Permutation::shuffled(std::uint64_t n, std::uint64_t seed) {
  // seed 0 is reserved for the identity; remap it
  const std::uint64_t key = seed == 0 ? 0x6b43a9b5eac1f097ULL : seed;
  return Permutation(n, key, n <= kExplicitCutoff);
}

std::uint64_t Permutation::feistel(std::uint64_t v) const {
  const std::uint64_t mask = (std::uint64_t{1} << half_bits_) - 1;
  std::uint64_t left = v >> half_bits_;
  std::uint64_t right = v & mask;
  for (int round = 0; round < 4; ++round) {
    const std::uint64_t f =
        mix64(key_ ^ (static_cast<std::uint64_t>(round) << 56) ^ right) & mask;
    const std::uint64_t next = left ^ f;
    left = right;
    right = next;
  }
  return (left << half_bits_) | right;
}

std::uint64_t Permutation::operator()(std::uint64_t k) const {
  if (k < 1 || k > n_) throw std::out_of_range("Permutation: index out of range");
  if (table_) return (*table_)[k - 1] + 1;
  if (key_ == 0) return k;
  // cycle-walk the power-of-two Feistel domain back into [0, n)
  std::uint64_t v = feistel(k - 1);
  while (v >= n_) v = feistel(v);
  return v + 1;
}

// --------------------------------------------------------------------------
// SeedDistribution

SeedDistribution SeedDistribution::bernoulli(double p) {
  check_p(p);
  SeedDistribution d;
  d.kind_ = Kind::Bernoulli;
  d.p_ = p;
  return d;
}

SeedDistribution SeedDistribution::bit_vector(double p, int T) {
  check_p(p);
  if (T < 1) throw std::invalid_argument("bit_vector: T must be >= 1");
  SeedDistribution d;
  d.kind_ = Kind::BitVec;
  d.p_ = p;
  d.T_ = T;
  return d;
}

SeedDistribution SeedDistribution::finite_sum(int N, int T, Permutation pi) {
  if (N < 2) throw std::invalid_argument("finite_sum: N must be >= 2");
  if (T < 1) throw std::invalid_argument("finite_sum: T must be >= 1");
  const std::uint64_t size = checked_pow(static_cast<std::uint64_t>(N), T);
  if (pi.size() != size)
    throw std::invalid_argument("finite_sum: permutation size != N^T");
  SeedDistribution d;
  d.kind_ = Kind::FiniteSum;
  d.p_ = 1.0 / N;
  d.T_ = T;
  d.N_ = N;
  d.pi_ = std::move(pi);
  return d;
}

SeedDistribution SeedDistribution::gaussian(double mean, double variance) {
  if (!(variance >= 0.0))
    throw std::invalid_argument("gaussian: variance must be >= 0");
  SeedDistribution d;
  d.kind_ = Kind::Gaussian;
  d.mean_ = mean;
  d.variance_ = variance;
  return d;
}

std::uint64_t SeedDistribution::atom_count() const {
  switch (kind_) {
    case Kind::Bernoulli:
      return 2;
    case Kind::BitVec:
      return T_ >= 63 ? 0 : (std::uint64_t{1} << T_);
    case Kind::FiniteSum:
      return checked_pow(static_cast<std::uint64_t>(N_), T_);
    case Kind::Gaussian:
      return 0;
  }
  return 0;
}

Seed SeedDistribution::atom(std::uint64_t idx) const {
  switch (kind_) {
    case Kind::Bernoulli:
      return Seed{static_cast<int>(idx)};
    case Kind::BitVec: {
      BitVector bits(T_);
      for (int j = 0; j < T_; ++j) bits[j] = (idx >> j) & 1u;
      return Seed{std::move(bits)};
    }
    case Kind::FiniteSum:
      return Seed{idx + 1};
    case Kind::Gaussian:
      throw UnsupportedSeedError("gaussian seed space is not enumerable");
  }
  throw std::logic_error("unreachable");
}

double SeedDistribution::atom_weight(std::uint64_t idx) const {
  switch (kind_) {
    case Kind::Bernoulli:
      return idx == 1 ? p_ : 1.0 - p_;
    case Kind::BitVec: {
      double w = 1.0;
      for (int j = 0; j < T_; ++j) w *= ((idx >> j) & 1u) ? p_ : 1.0 - p_;
      return w;
    }
    case Kind::FiniteSum:
      return 1.0 / static_cast<double>(atom_count());
    case Kind::Gaussian:
      throw UnsupportedSeedError("gaussian seed space is not enumerable");
  }
  throw std::logic_error("unreachable");
}

Seed SeedDistribution::draw(CounterRng& rng) const {
  switch (kind_) {
    case Kind::Bernoulli:
      return Seed{rng.next_bernoulli(p_) ? 1 : 0};
    case Kind::BitVec: {
      BitVector bits(T_);
      for (int j = 0; j < T_; ++j) bits[j] = rng.next_bernoulli(p_) ? 1 : 0;
      return Seed{std::move(bits)};
    }
    case Kind::FiniteSum:
      return Seed{rng.next_below(atom_count()) + 1};
    case Kind::Gaussian:
      return Seed{mean_ + std::sqrt(variance_) * rng.next_gaussian()};
  }
  throw std::logic_error("unreachable");
}

// --------------------------------------------------------------------------
// Estimators

Point g_basic(const ChainFunction& f, double p, const Point& x, int z) {
  check_p(p);
  check_bit(z);
  Point g = f.gradient(x);
  const int prog = progress(x, 0.25);
  const double scale = static_cast<double>(z) / p;
  for (int i = prog; i < g.size(); ++i) g[i] *= scale;
  return g;
}

Point g_smooth(const ChainFunction& f, double p, const Point& x, int z) {
  check_p(p);
  check_bit(z);
  Point g = f.gradient(x);
  const Eigen::VectorXd th = theta_all(x);
  const double noise = static_cast<double>(z) / p - 1.0;
  for (int i = 0; i < g.size(); ++i) g[i] *= 1.0 + th[i] * noise;
  return g;
}

double f_stat_value(const ChainFunction& f, double p, const Point& x, int z) {
  check_p(p);
  check_bit(z);
  if (x.size() != f.length())
    throw std::invalid_argument("f_stat_value: dimension mismatch");
  const Eigen::VectorXd th = theta_all(x);
  const double noise = static_cast<double>(z) / p - 1.0;
  double prev = 1.0;
  double total = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double link = psi(-prev) * phi(-x[i]) - psi(prev) * phi(x[i]);
    total += link * (1.0 + th[i] * noise);
    prev = x[i];
  }
  return total;
}

Point g_stat(const ChainFunction& f, double p, const Point& x, int z) {
  check_p(p);
  check_bit(z);
  const int n = f.length();
  if (x.size() != n) throw std::invalid_argument("g_stat: dimension mismatch");

  const Eigen::VectorXd suffix = gamma_suffix_norms(x);
  const double noise = static_cast<double>(z) / p - 1.0;

  // per-coordinate kernel caches so the gate-gradient double loop is
  // pure arithmetic
  Eigen::VectorXd gam(n), gam_d1(n), sgn(n), th(n);
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(x[i]);
    gam[i] = gamma_ramp(a);
    gam_d1[i] = gamma_ramp_d1(a);
    sgn[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    th[i] = gamma_ramp(1.0 - suffix[i]);
  }

  Point g(n);
  for (int i = 0; i < n; ++i) {
    const double a = (i == 0) ? 1.0 : x[i - 1];
    const double b = x[i];
    const double nu_i = 1.0 + th[i] * noise;
    double gi = -(psi(-a) * phi_d1(-b) + psi(a) * phi_d1(b)) * nu_i;
    if (i + 1 < n) {
      const double c = x[i + 1];
      const double nu_next = 1.0 + th[i + 1] * noise;
      gi -= (psi_d1(-b) * phi(-c) + psi_d1(b) * phi(c)) * nu_next;
    }
    g[i] = gi;
  }

  // gate-gradient terms: noise * sum_j H_j * grad Theta_j; only links whose
  // outer factor Gamma'(1 - s_j) and link value H_j are both nonzero
  // contribute, which is O(1) links away from the 1/4..1/2 shell
  double prev = 1.0;
  for (int j = 0; j < n; ++j) {
    const double H = psi(-prev) * phi(-x[j]) - psi(prev) * phi(x[j]);
    prev = x[j];
    if (H == 0.0) continue;
    const double sj = suffix[j];
    if (sj < 1e-300) continue;
    const double outer = gamma_ramp_d1(1.0 - sj);
    if (outer == 0.0) continue;
    const double w = noise * H * (-outer) / sj;
    for (int i = j; i < n; ++i) {
      if (gam[i] != 0.0) g[i] += w * gam[i] * gam_d1[i] * sgn[i];
    }
  }
  return g;
}

Point g_coord(const ChainFunction& f, double p, const Point& x,
              const BitVector& zbits) {
  check_p(p);
  if (static_cast<int>(zbits.size()) != f.length())
    throw std::invalid_argument("g_coord: bit vector length mismatch");
  Point g = f.gradient(x);
  const int prog = progress(x, 0.25);
  for (int i = prog; i < g.size(); ++i) {
    g[i] *= static_cast<double>(zbits[i]) / p;
  }
  return g;
}

BitVector zeta(std::uint64_t k, int N, int T) {
  const std::uint64_t size = checked_pow(static_cast<std::uint64_t>(N), T);
  if (k < 1 || k > size) throw std::out_of_range("zeta: seed index out of range");
  BitVector bits(T);
  std::uint64_t v = k - 1;
  for (int j = 0; j < T; ++j) {
    bits[j] = (v % N == 0) ? 1 : 0;
    v /= N;
  }
  return bits;
}

Point g_active(const ChainFunction& f, int N, const Permutation& pi,
               const Point& x, std::uint64_t k) {
  return g_coord(f, 1.0 / N, x, zeta(pi(k), N, f.length()));
}

std::pair<double, Point> quad_pair(const Point& x, double z, int s, double r,
                                   double lbar) {
  if (!(r > 0.0)) throw std::invalid_argument("quad_pair: r must be > 0");
  if (!(lbar > 0.0)) throw std::invalid_argument("quad_pair: lbar must be > 0");
  if (s != 1 && s != -1) throw std::invalid_argument("quad_pair: s must be +-1");
  const double value = 0.5 * lbar * (x.squaredNorm() - 2.0 * z * x[0] + r * r);
  Point grad = lbar * x;
  grad[0] -= lbar * z;
  return {value, std::move(grad)};
}

// --------------------------------------------------------------------------
// Closed-form moments

namespace {

std::uint64_t enumerable_atoms(const SeedDistribution& dist) {
  if (dist.kind() == SeedDistribution::Kind::Gaussian)
    throw UnsupportedSeedError("closed-form moments need an enumerable seed");
  const std::uint64_t count = dist.atom_count();
  if (count == 0 || count > (std::uint64_t{1} << 20))
    throw UnsupportedSeedError("seed space too large to enumerate");
  return count;
}

}  // namespace

std::pair<Point, double> closed_form_moments(const StochasticOracle& oracle,
                                             const Point& x) {
  const auto& dist = oracle.seed_distribution();
  const std::uint64_t count = enumerable_atoms(dist);
  Point mean = Point::Zero(oracle.dimension());
  std::vector<Point> values;
  std::vector<double> weights;
  values.reserve(count);
  weights.reserve(count);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const double w = dist.atom_weight(idx);
    values.push_back(oracle.gradient_estimate(x, dist.atom(idx)));
    weights.push_back(w);
    mean += w * values.back();
  }
  double variance = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    variance += weights[idx] * (values[idx] - mean).squaredNorm();
  }
  return {std::move(mean), variance};
}

double closed_form_pair_mss(const StochasticOracle& oracle, const Point& x,
                            const Point& y) {
  const auto& dist = oracle.seed_distribution();
  const std::uint64_t count = enumerable_atoms(dist);
  double total = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const Seed z = dist.atom(idx);
    total += dist.atom_weight(idx) *
             (oracle.gradient_estimate(x, z) - oracle.gradient_estimate(y, z))
                 .squaredNorm();
  }
  return total;
}

}  // namespace pzc
