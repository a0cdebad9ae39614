#include "pzc/chain.hpp"

#include <cmath>
#include <stdexcept>

#include "pzc/kernels.hpp"

namespace pzc {

namespace {
// Norms below this switch theta_gradient to its zero branch.
constexpr double kThetaNormFloor = 1e-300;
}  // namespace

LinkTerms link_terms(double a, double b) {
  LinkTerms lt;
  lt.H = psi(-a) * phi(-b) - psi(a) * phi(b);
  lt.h1 = psi(-a) * phi_d1(-b) + psi(a) * phi_d1(b);
  lt.h2 = psi_d1(-a) * phi(-b) + psi_d1(a) * phi(b);
  return lt;
}

int progress(const Point& x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("progress: alpha must be in [0, 1)");
  for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) {
    if (std::abs(x[i]) > alpha) return i + 1;
  }
  return 0;
}

std::vector<int> support(const Point& x, double tol) {
  std::vector<int> idx;
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > tol) idx.push_back(i + 1);
  }
  return idx;
}

ChainFunction::ChainFunction(int length) : length_(length) {
  if (length < 1) throw std::invalid_argument("ChainFunction: length must be >= 1");
}

void ChainFunction::check_dimension(const Point& x) const {
  if (x.size() != length_)
    throw std::invalid_argument("ChainFunction: dimension mismatch");
}

double ChainFunction::value(const Point& x) const {
  check_dimension(x);
  double prev = 1.0;  // virtual x_0
  double total = 0.0;
  for (int i = 0; i < length_; ++i) {
    total += psi(-prev) * phi(-x[i]) - psi(prev) * phi(x[i]);
    prev = x[i];
  }
  return total;
}

Point ChainFunction::gradient(const Point& x) const {
  check_dimension(x);
  Point g(length_);
  for (int i = 0; i < length_; ++i) {
    const double a = (i == 0) ? 1.0 : x[i - 1];
    const double b = x[i];
    double gi = -(psi(-a) * phi_d1(-b) + psi(a) * phi_d1(b));
    if (i + 1 < length_) {
      const double c = x[i + 1];
      gi -= psi_d1(-b) * phi(-c) + psi_d1(b) * phi(c);
    }
    g[i] = gi;
  }
  return g;
}

void ChainFunction::hessian_bands(const Point& x, Point& diag, Point& off) const {
  check_dimension(x);
  diag.resize(length_);
  off.resize(length_ > 1 ? length_ - 1 : 0);
  for (int i = 0; i < length_; ++i) {
    const double a = (i == 0) ? 1.0 : x[i - 1];
    const double b = x[i];
    double dii = psi(-a) * phi_d2(-b) - psi(a) * phi_d2(b);
    if (i + 1 < length_) {
      const double c = x[i + 1];
      dii += psi_d2(-b) * phi(-c) - psi_d2(b) * phi(c);
      off[i] = psi_d1(-b) * phi_d1(-c) - psi_d1(b) * phi_d1(c);
    }
    diag[i] = dii;
  }
}

Eigen::VectorXd gamma_suffix_norms(const Point& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd s(n);
  double acc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double g = gamma_ramp(std::abs(x[i]));
    acc += g * g;
    s[i] = std::sqrt(acc);
  }
  return s;
}

double theta(int j, const Point& x) {
  if (j < 1 || j > x.size()) throw std::out_of_range("theta: index out of range");
  double acc = 0.0;
  for (int i = static_cast<int>(x.size()) - 1; i >= j - 1; --i) {
    const double g = gamma_ramp(std::abs(x[i]));
    acc += g * g;
  }
  return gamma_ramp(1.0 - std::sqrt(acc));
}

Eigen::VectorXd theta_all(const Point& x) {
  const Eigen::VectorXd s = gamma_suffix_norms(x);
  Eigen::VectorXd out(x.size());
  for (int i = 0; i < x.size(); ++i) out[i] = gamma_ramp(1.0 - s[i]);
  return out;
}

Point theta_gradient(int j, const Point& x) {
  if (j < 1 || j > x.size())
    throw std::out_of_range("theta_gradient: index out of range");
  const int n = static_cast<int>(x.size());
  Point grad = Point::Zero(n);
  double acc = 0.0;
  for (int i = n - 1; i >= j - 1; --i) {
    const double g = gamma_ramp(std::abs(x[i]));
    acc += g * g;
  }
  const double norm = std::sqrt(acc);
  if (norm < kThetaNormFloor) return grad;
  const double outer = gamma_ramp_d1(1.0 - norm);
  if (outer == 0.0) return grad;
  for (int i = j - 1; i < n; ++i) {
    const double a = std::abs(x[i]);
    const double gi = gamma_ramp(a);
    if (gi == 0.0) continue;
    const double sgn = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    grad[i] = -outer * (gi / norm) * gamma_ramp_d1(a) * sgn;
  }
  return grad;
}

}  // namespace pzc
