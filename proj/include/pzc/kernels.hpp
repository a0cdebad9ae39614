#pragma once

#include <cmath>

namespace pzc {

// Scalar component functions of the hard-instance construction.
//
//   Psi    : 0 for t <= 1/2, exp(1 - 1/(2t-1)^2) above
//   Phi    : sqrt(e) * integral of exp(-tau^2/2) from -inf to t
//   Lambda : bump supported on (1/4, 1/2)
//   Gamma  : integrated, normalized Lambda; ramps 0 -> 1 across [1/4, 1/2]
enum class Kernel { Psi, Phi, Lambda, Gamma };

// Certified sup-norm bounds for the kernels and their first two
// derivatives. Every audit in this module compares against exactly
// these numbers.
struct KernelBounds {
  double psi_max = 2.718281828459045235360287471353;    // e
  double psi_d1_max = 4.457071888988453;                // sqrt(54/e)
  double psi_d2_max = 32.5;
  double phi_max = 4.132731354122493;                   // sqrt(2*pi*e)
  double phi_d1_max = 1.648721270700128;                // sqrt(e)
  double phi_d2_max = 1.0;
  double gamma_d1_max = 6.0;
  double gamma_d2_max = 128.0;
};

// Evaluates a kernel or one of its first two derivatives.
// Throws std::domain_error for non-finite t and std::invalid_argument
// for order outside {0, 1, 2}.
double eval_kernel(Kernel kernel, int order, double t);

double psi(double t);
double psi_d1(double t);
double psi_d2(double t);

double phi(double t);
double phi_d1(double t);
double phi_d2(double t);

double lambda_bump(double t);
double lambda_d1(double t);
double lambda_d2(double t);

// Gamma order 0 is served from a precomputed cubic-interpolation table;
// the derivatives are analytic (Lambda / mass and Lambda' / mass).
double gamma_ramp(double t);
double gamma_ramp_d1(double t);
double gamma_ramp_d2(double t);

// Total mass of the bump over its support, computed once by adaptive
// Simpson quadrature to 1e-12 absolute error.
double lambda_mass();

// Slow reference path for gamma_ramp(t): direct quadrature of the bump,
// bypassing the table. Used by the normalization audit.
double gamma_by_quadrature(double t);

// Generic adaptive Simpson integrator (exposed for test oracles).
template <typename F>
double adaptive_simpson(F f, double a, double b, double tol, int depth = 48) {
  auto simpson = [](double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
  };
  struct Rec {
    double a, b, fa, fm, fb, whole, tol;
    int depth;
  };
  const double m0 = 0.5 * (a + b);
  const double fa = f(a), fm = f(m0), fb = f(b);
  double total = 0.0;
  Rec stack[160];
  int top = 0;
  stack[top++] = {a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, depth};
  while (top > 0) {
    Rec r = stack[--top];
    const double m = 0.5 * (r.a + r.b);
    const double lm = 0.5 * (r.a + m), rm = 0.5 * (m + r.b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(r.fa, flm, r.fm, m - r.a);
    const double right = simpson(r.fm, frm, r.fb, r.b - m);
    const double err = left + right - r.whole;
    if (r.depth <= 0 || std::abs(err) <= 15.0 * r.tol) {
      total += left + right + err / 15.0;
    } else {
      stack[top++] = {r.a, m, r.fa, flm, r.fm, left, 0.5 * r.tol, r.depth - 1};
      stack[top++] = {m, r.b, r.fm, frm, r.fb, right, 0.5 * r.tol, r.depth - 1};
    }
  }
  return total;
}

}  // namespace pzc
