#include "pzc/kernels.hpp"

#include <array>
#include <stdexcept>

namespace pzc {
namespace {

constexpr double kSqrtE = 1.6487212707001281468486507878142;
constexpr double kSqrt2PiE = 4.1327313541224929384693918842998;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

// exp() underflows to zero below roughly -745.1; evaluating the exponent
// first and short-circuiting avoids 0 * inf in the derivative formulas.
constexpr double kUnderflowExponent = -745.0;

constexpr double kBumpLo = 0.25;
constexpr double kBumpHi = 0.5;

inline double bump_exponent(double t) {
  return -1.0 / (100.0 * (t - kBumpLo) * (kBumpHi - t));
}

constexpr int kGammaTableSize = 4096;

struct GammaTable {
  double mass = 0.0;
  std::array<double, kGammaTableSize> value{};

  GammaTable() {
    mass = adaptive_simpson([](double t) { return lambda_bump(t); }, kBumpLo,
                            kBumpHi, 1e-12);
    const double h = (kBumpHi - kBumpLo) / (kGammaTableSize - 1);
    double acc = 0.0;
    value[0] = 0.0;
    for (int i = 1; i < kGammaTableSize; ++i) {
      const double a = kBumpLo + (i - 1) * h;
      const double b = kBumpLo + i * h;
      // composite Simpson over 4 panels per cell; the integrand is smooth
      // and the cells are ~6e-5 wide, so this is far below 1e-12 error
      double cell = 0.0;
      const double ph = (b - a) / 4.0;
      for (int k = 0; k < 4; ++k) {
        const double x0 = a + k * ph;
        cell += ph / 6.0 *
                (lambda_bump(x0) + 4.0 * lambda_bump(x0 + 0.5 * ph) +
                 lambda_bump(x0 + ph));
      }
      acc += cell;
      value[i] = acc;
    }
    // normalize by the table's own total so the upper plateau is exactly 1
    const double total = value[kGammaTableSize - 1];
    for (auto& v : value) v /= total;
  }
};

const GammaTable& gamma_table() {
  static const GammaTable table;
  return table;
}

}  // namespace

double psi(double t) {
  if (t <= 0.5) return 0.0;
  const double u = 2.0 * t - 1.0;
  const double s = 1.0 - 1.0 / (u * u);
  if (s < kUnderflowExponent) return 0.0;
  return std::exp(s);
}

double psi_d1(double t) {
  if (t <= 0.5) return 0.0;
  const double u = 2.0 * t - 1.0;
  const double s = 1.0 - 1.0 / (u * u);
  if (s < kUnderflowExponent) return 0.0;
  return std::exp(s) * 4.0 / (u * u * u);
}

double psi_d2(double t) {
  if (t <= 0.5) return 0.0;
  const double u = 2.0 * t - 1.0;
  const double s = 1.0 - 1.0 / (u * u);
  if (s < kUnderflowExponent) return 0.0;
  const double u2 = u * u;
  const double u4 = u2 * u2;
  return std::exp(s) * (16.0 / (u4 * u2) - 24.0 / u4);
}

double phi(double t) {
  // sqrt(2*pi*e) * standard normal CDF; closed form instead of quadrature
  return kSqrt2PiE * 0.5 * std::erfc(-t * kInvSqrt2);
}

double phi_d1(double t) { return kSqrtE * std::exp(-0.5 * t * t); }

double phi_d2(double t) { return -t * kSqrtE * std::exp(-0.5 * t * t); }

double lambda_bump(double t) {
  if (t <= kBumpLo || t >= kBumpHi) return 0.0;
  const double s = bump_exponent(t);
  if (s < kUnderflowExponent) return 0.0;
  return std::exp(s);
}

double lambda_d1(double t) {
  if (t <= kBumpLo || t >= kBumpHi) return 0.0;
  const double s = bump_exponent(t);
  if (s < kUnderflowExponent) return 0.0;
  const double q = (t - kBumpLo) * (kBumpHi - t);
  const double qp = 0.75 - 2.0 * t;
  return std::exp(s) * qp / (100.0 * q * q);
}

double lambda_d2(double t) {
  if (t <= kBumpLo || t >= kBumpHi) return 0.0;
  const double s = bump_exponent(t);
  if (s < kUnderflowExponent) return 0.0;
  const double q = (t - kBumpLo) * (kBumpHi - t);
  const double qp = 0.75 - 2.0 * t;
  const double sp = qp / (100.0 * q * q);
  const double spp = -2.0 / (100.0 * q * q) - 2.0 * qp * qp / (100.0 * q * q * q);
  return std::exp(s) * (sp * sp + spp);
}

double lambda_mass() { return gamma_table().mass; }

double gamma_ramp(double t) {
  if (t <= kBumpLo) return 0.0;
  if (t >= kBumpHi) return 1.0;
  const auto& table = gamma_table();
  const double h = (kBumpHi - kBumpLo) / (kGammaTableSize - 1);
  const double pos = (t - kBumpLo) / h;
  int j = static_cast<int>(pos);
  if (j < 1) j = 1;
  if (j > kGammaTableSize - 3) j = kGammaTableSize - 3;
  // 4-point Lagrange cubic on the uniform grid around cell j
  const double s = pos - j;
  const double ym1 = table.value[j - 1], y0 = table.value[j];
  const double y1 = table.value[j + 1], y2 = table.value[j + 2];
  const double a = (-s * (s - 1.0) * (s - 2.0)) / 6.0;
  const double b = ((s + 1.0) * (s - 1.0) * (s - 2.0)) / 2.0;
  const double c = (-(s + 1.0) * s * (s - 2.0)) / 2.0;
  const double d = ((s + 1.0) * s * (s - 1.0)) / 6.0;
  const double out = a * ym1 + b * y0 + c * y1 + d * y2;
  // interpolation of monotone data can overshoot the plateaus by an ulp
  return out < 0.0 ? 0.0 : (out > 1.0 ? 1.0 : out);
}

double gamma_ramp_d1(double t) { return lambda_bump(t) / gamma_table().mass; }

double gamma_ramp_d2(double t) { return lambda_d1(t) / gamma_table().mass; }

double gamma_by_quadrature(double t) {
  if (t <= kBumpLo) return 0.0;
  if (t >= kBumpHi) return 1.0;
  const double part = adaptive_simpson(
      [](double u) { return lambda_bump(u); }, kBumpLo, t, 1e-13);
  return part / gamma_table().mass;
}

double eval_kernel(Kernel kernel, int order, double t) {
  if (!std::isfinite(t)) throw std::domain_error("eval_kernel: non-finite t");
  if (order < 0 || order > 2)
    throw std::invalid_argument("eval_kernel: order must be 0, 1 or 2");
  switch (kernel) {
    case Kernel::Psi:
      return order == 0 ? psi(t) : order == 1 ? psi_d1(t) : psi_d2(t);
    case Kernel::Phi:
      return order == 0 ? phi(t) : order == 1 ? phi_d1(t) : phi_d2(t);
    case Kernel::Lambda:
      return order == 0 ? lambda_bump(t)
                        : order == 1 ? lambda_d1(t) : lambda_d2(t);
    case Kernel::Gamma:
      return order == 0 ? gamma_ramp(t) : order == 1 ? gamma_ramp_d1(t) : gamma_ramp_d2(t);
  }
  throw std::invalid_argument("eval_kernel: unknown kernel");
}

}  // namespace pzc
