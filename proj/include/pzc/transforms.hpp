#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pzc/chain.hpp"
#include "pzc/oracles.hpp"

namespace pzc {

// Requested accuracy is out of range for the recipe; carries the largest
// epsilon the other parameters can support.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double max_eps)
      : std::runtime_error(what), max_feasible_eps(max_eps) {}
  double max_feasible_eps;
};

// Output of the scaling recipes: coordinate scale, chain length, release
// probability, the effective smoothness actually used, and the round count
// below which the instance certifies no stationary point is found (w.p. 1/2).
struct ScaleParams {
  double lambda = 0.0;
  int T = 0;
  double p = 1.0;
  double l_effective = 0.0;
  double lower_bound_rounds = 0.0;
};

// lambda = 2 eps l1 / L, T = floor(L Delta / (Delta0 l1 (2 eps)^2)),
// p = min{(2*23*eps)^2 / sigma2, 1}. Requires T >= 3.
ScaleParams scale_params_bounded_variance(double eps, double delta, double L,
                                          double sigma2);

// Same recipe with L replaced by L_eff = (l1/l1bar) * lbar * sqrt(p), which
// keeps the scaled estimator inside the mean-squared smooth class.
ScaleParams scale_params_mss(double eps, double delta, double lbar,
                             double sigma2);

// Rotated/compressed variant: factor 4 eps, l1 = 155, T >= 4.
ScaleParams scale_params_randomized(double eps, double delta, double L,
                                    double sigma2);

// Rotated/compressed mean-squared smooth variant (l1 = 155, l1bar = 336).
ScaleParams scale_params_randomized_mss(double eps, double delta, double lbar,
                                        double sigma2);

// d x T matrix with orthonormal columns.
struct RotationMatrix {
  Eigen::MatrixXd columns;
  int ambient_dim() const { return static_cast<int>(columns.rows()); }
  int chain_dim() const { return static_cast<int>(columns.cols()); }
};

// Haar-distributed draw from the set of d x T column-orthonormal matrices:
// QR of an iid Gaussian matrix with the triangular factor's diagonal signs
// fixed, which makes the draw exactly Haar. Deterministic per seed.
RotationMatrix sample_rotation(int d, int T, std::uint64_t rng_seed);

// Soft projection rho(x) = x / sqrt(1 + ||x||^2 / R^2) and the action of its
// Jacobian J(x) = (I - rho rho^T / R^2) / sqrt(1 + ||x||^2 / R^2).
// J is symmetric, so apply_jacobian serves both J v and J^T v; the rank-one
// form keeps the evaluation O(d) without materializing J.
struct SoftProjection {
  Point rho;
  double scale = 1.0;  // 1 / sqrt(1 + ||x||^2 / R^2)
  double radius = 0.0;

  Point apply_jacobian(const Point& v) const {
    return scale * (v - rho * (rho.dot(v) / (radius * radius)));
  }
};

SoftProjection soft_project(const Point& x, double R);

// The rotated, compressed, regularized instance over R^d:
//   value(x)    = F_T(U^T rho(x)) + (eta/2) ||x||^2
//   estimate    = J(x)^T U gbar_T(U^T rho(x), z) + eta x
//   mean        = J(x)^T U grad F_T(U^T rho(x)) + eta x
// with the smoothed estimator gbar as the base.
class CompressedInstance {
 public:
  CompressedInstance(ChainFunction chain, double p, RotationMatrix rotation,
                     double radius, double eta);

  int dimension() const { return rotation_.ambient_dim(); }
  const ChainFunction& chain() const { return chain_; }
  const RotationMatrix& rotation() const { return rotation_; }
  double radius() const { return radius_; }
  double eta() const { return eta_; }
  double p() const { return p_; }

  double value(const Point& x) const;
  Point estimate(const Point& x, int z) const;
  Point mean_gradient(const Point& x) const;

 private:
  ChainFunction chain_;
  double p_;
  RotationMatrix rotation_;
  double radius_;
  double eta_;
};

// (value, gradient estimate) of the compressed instance at (x, z).
std::pair<double, Point> compressed_eval(const CompressedInstance& ci,
                                         const Point& x, int z);

// Ambient dimension required for the rotated construction to hide unseen
// coordinates from norm-R queries over K-batches for T rounds:
//   ceil(18 R^2 K T / p * log(2 K T^2 / (p delta))).
// R <= 0 selects the default 230 sqrt(T) of the compressed instance, for
// which the bound becomes ceil(18 * 230^2 * K T^2 / p * log(...)).
double required_dimension(double K, double T, double p, double delta,
                          double R = 0.0);

// --------------------------------------------------------------------------
// Instance builders

enum class InstanceKind { ZrBv, ZrMss, RandBv, RandMss, Stat, Active, Quad };

std::string to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(const std::string& name);

// Declarative description of one instance, serializable to the flat
// key/value manifest form.
struct InstanceSpec {
  InstanceKind kind = InstanceKind::ZrBv;
  // scaling recipes (ZR_*, RAND_*)
  double eps = 0.0;
  double delta = 0.0;
  double smoothness = 0.0;  // L or Lbar depending on the kind
  double sigma2 = 0.0;
  // direct chain parameters (STAT; ACTIVE uses N and T)
  int T = 0;
  double p = 0.0;
  int N = 0;
  // ambient dimension override for RAND_* (default 4T) and QUAD
  int d = 0;
  // quadratic instance
  double quad_r = 0.0;
  int quad_s = 1;
  // rotation / permutation seed
  std::uint64_t seed = 0;
};

std::vector<std::pair<std::string, std::string>> instance_kv(
    const InstanceSpec& spec);
InstanceSpec instance_from_kv(
    const std::vector<std::pair<std::string, std::string>>& kv);

enum class ChainEstimatorKind { Basic, Smooth, Stat, Coord };

// The unscaled building block the recipes wrap: chain of length T with the
// chosen estimator at release probability p. Certificates carry the
// unscaled constants. Audits and walker simulations use this directly.
StochasticOracle unscaled_chain_instance(int T, double p,
                                         ChainEstimatorKind kind);

// Builds the full oracle for a spec: scale o (rotate o compress) o base.
// The certificate records the declared class parameters; closed-form audits
// check the instance against exactly those numbers.
StochasticOracle build_instance(const InstanceSpec& spec);

}  // namespace pzc
