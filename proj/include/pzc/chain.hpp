#pragma once

#include <Eigen/Core>
#include <vector>

namespace pzc {

using Point = Eigen::VectorXd;

// Numerical zero for progress/support of computed gradients. The
// construction produces exact zeros analytically; the threshold only
// guards against accumulated rounding.
constexpr double kZeroTol = 1e-12;

// Certified constants of the chain construction. All audits reference
// exactly these values.
struct ChainConstants {
  double delta0 = 12.0;        // initial suboptimality per link
  double lip1 = 152.0;         // gradient Lipschitz constant
  double grad_inf = 23.0;      // sup-norm bound on the gradient
  double varsigma = 23.0;      // noise scale of the one-coordinate estimators
  double lip1_bar = 328.0;     // mean-squared smoothness, smoothed estimator
  double lip1_rot = 155.0;     // gradient Lipschitz after soft projection
  double lip1_bar_rot = 336.0; // mean-squared smoothness after soft projection
  double large_grad = 1.0;     // gradient floor while the chain is incomplete
};

// Shorthand triple for one chain link at coordinate pair (a, b):
//   H  = Psi(-a)Phi(-b) - Psi(a)Phi(b)     (the link's contribution to F)
//   h1 = Psi(-a)Phi'(-b) + Psi(a)Phi'(b)   (-dH/db)
//   h2 = Psi'(-a)Phi(-b) + Psi'(a)Phi(b)   (-dH/da)
// Bounds: |H| <= 12, |h1| <= 5, |h2| <= 20.
struct LinkTerms {
  double H;
  double h1;
  double h2;
};

LinkTerms link_terms(double a, double b);

// Largest 1-based index i with |x_i| > alpha, or 0 if none. The virtual
// coordinate x_0 == 1 always qualifies, hence the 0 floor.
int progress(const Point& x, double alpha);

// 1-based indices of the nonzero coordinates (|x_i| > tol).
std::vector<int> support(const Point& x, double tol = kZeroTol);

// The chain function F_T: R^T -> R,
//   F_T(x) = sum_{i=1..T} H(x_{i-1}, x_i)   with x_0 == 1.
// Value, analytic gradient and the two bands of the tridiagonal Hessian.
class ChainFunction {
 public:
  explicit ChainFunction(int length);

  int length() const { return length_; }

  double value(const Point& x) const;
  Point gradient(const Point& x) const;

  // diag has T entries, off has T-1 (superdiagonal; the Hessian is
  // symmetric and tridiagonal).
  void hessian_bands(const Point& x, Point& diag, Point& off) const;

 private:
  void check_dimension(const Point& x) const;
  int length_;
};

// Smoothed indicator of "coordinate j not yet reached":
//   Theta_j(x) = Gamma(1 - ||Gamma(|x_{>=j}|)||),
// which satisfies 1{j > prog_{1/4}(x)} <= Theta_j(x) <= 1{j > prog_{1/2}(x)}.
// j is 1-based, 1 <= j <= dim(x).
double theta(int j, const Point& x);

// Gradient of Theta_j; entries with i < j are zero.
Point theta_gradient(int j, const Point& x);

// Theta_j for every j = 1..T in one backward pass (suffix sums of
// Gamma^2(|x_k|)); O(T) total instead of O(T^2).
Eigen::VectorXd theta_all(const Point& x);

// Suffix norms s_j = ||Gamma(|x_{>=j}|)|| for j = 1..T (index j-1 in the
// returned vector). Shared by theta / theta_gradient / the estimators.
Eigen::VectorXd gamma_suffix_norms(const Point& x);

}  // namespace pzc
