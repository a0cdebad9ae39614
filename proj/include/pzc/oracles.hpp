#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "pzc/chain.hpp"
#include "pzc/rng.hpp"

namespace pzc {

using BitVector = std::vector<std::uint8_t>;

// Oracle seed: a Bernoulli bit, a per-coordinate bit vector, a finite-sum
// index in [1, N^T], or a real Gaussian draw, depending on the variant.
using Seed = std::variant<int, BitVector, std::uint64_t, double>;

// Thrown when an operation needs an enumerable seed space and the
// distribution is continuous or too large to enumerate.
class UnsupportedSeedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bijection on {1, ..., n}. Explicit array up to kExplicitCutoff entries;
// above that a keyed format-preserving cipher (cycle-walking Feistel), so
// permutations of astronomically large seed spaces cost O(1) memory.
class Permutation {
 public:
  static constexpr std::uint64_t kExplicitCutoff = 1u << 20;

  static Permutation identity(std::uint64_t n);
  static Permutation shuffled(std::uint64_t n, std::uint64_t seed);

  std::uint64_t size() const { return n_; }
  std::uint64_t operator()(std::uint64_t k) const;  // k in [1, n]

 private:
  Permutation(std::uint64_t n, std::uint64_t key, bool explicit_table);

  std::uint64_t feistel(std::uint64_t v) const;

  std::uint64_t n_ = 0;
  std::uint64_t key_ = 0;
  int half_bits_ = 0;
  std::shared_ptr<const std::vector<std::uint64_t>> table_;
};

class SeedDistribution {
 public:
  enum class Kind { Bernoulli, BitVec, FiniteSum, Gaussian };

  static SeedDistribution bernoulli(double p);
  static SeedDistribution bit_vector(double p, int T);
  static SeedDistribution finite_sum(int N, int T, Permutation pi);
  static SeedDistribution gaussian(double mean, double variance);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  int chain_length() const { return T_; }
  int summands() const { return N_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  const Permutation& permutation() const { return pi_; }

  // Number of atoms of a discrete seed space; 0 when continuous.
  std::uint64_t atom_count() const;
  Seed atom(std::uint64_t idx) const;
  double atom_weight(std::uint64_t idx) const;

  Seed draw(CounterRng& rng) const;

 private:
  SeedDistribution() = default;

  Kind kind_ = Kind::Bernoulli;
  double p_ = 1.0;
  int T_ = 0;
  int N_ = 0;
  double mean_ = 0.0;
  double variance_ = 0.0;
  Permutation pi_ = Permutation::identity(1);
};

// ---------------------------------------------------------------------------
// Gradient estimators. All are unbiased for the chain gradient; they differ
// in which coordinates carry seed noise and how the noise is gated.

// One shared Bernoulli bit; the single coordinate past prog_{1/4}(x) is
// scaled by z/p, everything at or below is exact.
Point g_basic(const ChainFunction& f, double p, const Point& x, int z);

// Same shape with the hard indicator replaced by the smooth gate Theta,
// which restores mean-squared smoothness.
Point g_smooth(const ChainFunction& f, double p, const Point& x, int z);

// Scalar sample whose expectation is the chain value: each link is scaled
// by its gate nu_i(x,z) = 1 + Theta_i(x)(z/p - 1).
double f_stat_value(const ChainFunction& f, double p, const Point& x, int z);

// Analytic x-gradient of f_stat_value; carries extra terms from the
// gradient of the gate itself.
Point g_stat(const ChainFunction& f, double p, const Point& x, int z);

// Independent bit per coordinate (active-oracle building block).
Point g_coord(const ChainFunction& f, double p, const Point& x,
              const BitVector& zbits);

// Bit j of the seed decoding map: 1 iff the j-th base-N digit of k-1
// (least significant first, T digits) is zero. Exactly N^{T-1} of the
// N^T seeds light up any given bit.
BitVector zeta(std::uint64_t k, int N, int T);

// Finite-sum active oracle: g_coord with bits zeta(pi(k)) and p = 1/N.
Point g_active(const ChainFunction& f, int N, const Permutation& pi,
               const Point& x, std::uint64_t k);

// Quadratic estimation instance: f(x,z) = (lbar/2)(||x||^2 - 2 z x_1 + r^2)
// with z ~ Normal(r*s, sigma^2/lbar^2). Returns (value, gradient) at x.
std::pair<double, Point> quad_pair(const Point& x, double z, int s, double r,
                                   double lbar);

// ---------------------------------------------------------------------------
// Instance type: immutable bundle of objective, estimator, seed law and the
// declared parameter certificate.

struct OracleCertificate {
  double delta_bound = 0.0;     // initial suboptimality bound
  double smoothness = 0.0;      // Lipschitz constant of the mean gradient
  double mss = 0.0;             // mean-squared smoothness bound (0: none declared)
  double variance_bound = 0.0;  // sup_x E||g - mean||^2
  double p = 1.0;               // per-round coordinate release probability
  int T = 0;                    // chain length (0: not chain-structured)
  int d = 0;                    // ambient dimension
};

// How a built instance sits in its ambient space. Walkers and progress
// accounting need the coordinate scale and the (optional) rotation.
struct InstanceGeometry {
  double lambda = 1.0;       // embedded chain coordinate scale
  double radius = 0.0;       // soft-projection radius; 0 = none
  Eigen::MatrixXd rotation;  // d x T column-orthonormal; empty = none
};

class OracleCore {
 public:
  virtual ~OracleCore() = default;
  virtual int dimension() const = 0;
  virtual double objective(const Point& x) const = 0;
  virtual Point estimate(const Point& x, const Seed& z) const = 0;
  virtual Point mean_gradient(const Point& x) const = 0;
};

class StochasticOracle {
 public:
  StochasticOracle(std::shared_ptr<const OracleCore> core,
                   SeedDistribution seeds, OracleCertificate certificate)
      : core_(std::move(core)),
        seeds_(std::move(seeds)),
        certificate_(certificate) {}

  int dimension() const { return core_->dimension(); }
  double objective(const Point& x) const { return core_->objective(x); }
  Point gradient_estimate(const Point& x, const Seed& z) const {
    return core_->estimate(x, z);
  }
  Point mean_gradient(const Point& x) const { return core_->mean_gradient(x); }

  const SeedDistribution& seed_distribution() const { return seeds_; }
  const OracleCertificate& certificate() const { return certificate_; }

  const InstanceGeometry& geometry() const { return geometry_; }
  void set_geometry(InstanceGeometry geometry) {
    geometry_ = std::move(geometry);
  }

 private:
  std::shared_ptr<const OracleCore> core_;
  SeedDistribution seeds_;
  OracleCertificate certificate_;
  InstanceGeometry geometry_;
};

// Exact first and second moments by enumerating the seed space.
// Refuses (UnsupportedSeedError) for Gaussian seeds or more than 2^20 atoms:
// exactness is the point of this operation, it never falls back to sampling.
std::pair<Point, double> closed_form_moments(const StochasticOracle& oracle,
                                             const Point& x);

// Exact E_z || g(x,z) - g(y,z) ||^2 over an enumerable seed space.
double closed_form_pair_mss(const StochasticOracle& oracle, const Point& x,
                            const Point& y);

}  // namespace pzc
