#include "pzc/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "pzc/kernels.hpp"
#include "pzc/parallel.hpp"
#include "pzc/protocol.hpp"
#include "pzc/solvers.hpp"

namespace pzc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct ReportBuilder {
  explicit ReportBuilder(std::string s) : suite(std::move(s)) {}

  std::string suite;
  std::vector<AuditReport> reports;
  Clock::time_point mark = Clock::now();

  void add(const std::string& name, std::uint64_t samples, double worst,
           double bound, double tol = 0.0) {
    AuditReport r;
    r.suite = suite;
    r.name = name;
    r.samples = samples;
    r.worst = worst;
    r.bound = bound;
    r.pass = worst <= bound + tol;
    r.seconds = seconds_since(mark);
    mark = Clock::now();
    reports.push_back(std::move(r));
  }
};

Point uniform_point(CounterRng& rng, int dim, double lo, double hi) {
  Point x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.next_uniform(lo, hi);
  return x;
}

Point unit_direction(CounterRng& rng, int dim) {
  Point u(dim);
  for (int i = 0; i < dim; ++i) u[i] = rng.next_gaussian();
  const double n = u.norm();
  return n > 0 ? Point(u / n) : Point(Point::Unit(dim, 0));
}

double log_spaced(CounterRng& rng, double lo, double hi) {
  return std::pow(10.0, rng.next_uniform(std::log10(lo), std::log10(hi)));
}

std::uint64_t scaled(std::uint64_t n, double scale) {
  const double v = static_cast<double>(n) * scale;
  return v < 16 ? 16 : static_cast<std::uint64_t>(v);
}

// Max-merge accumulator for parallel sweeps.
struct Worst {
  std::vector<double> slots;
  explicit Worst(double init = -1e300) : slots(kParallelChunks, init) {}
  double merged() const {
    double m = slots.empty() ? 0.0 : slots.front();
    for (double v : slots) m = std::max(m, v);
    return m;
  }
};

constexpr int kChainT = 25;

// x with exactly two coordinates inside the ramp of the gate (so the suffix
// norm lands in the region where the outer derivative is nonzero) and the
// rest below the lower plateau; j at or below the first ramp coordinate.
std::pair<Point, int> active_shell_sample(CounterRng& rng, int T) {
  Point x = uniform_point(rng, T, -0.2, 0.2);
  int k1 = static_cast<int>(rng.next_below(T - 1));
  int k2 = k1 + 1 + static_cast<int>(rng.next_below(T - 1 - k1));
  const double sgn1 = rng.next_bernoulli(0.5) ? 1.0 : -1.0;
  const double sgn2 = rng.next_bernoulli(0.5) ? 1.0 : -1.0;
  x[k1] = sgn1 * rng.next_uniform(0.30, 0.40);
  x[k2] = sgn2 * rng.next_uniform(0.30, 0.40);
  const int j = 1 + static_cast<int>(rng.next_below(k1 + 1));
  return {std::move(x), j};
}

// progress with no range restriction on the threshold (alpha = 1 is used
// by the large-gradient clause)
int prog_above(const Point& x, double alpha) {
  for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) {
    if (std::abs(x[i]) > alpha) return i + 1;
  }
  return 0;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> kernel_bounds_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("kernels");
  const KernelBounds kb;

  // Psi / Phi grid over [-5, 5]
  {
    const std::uint64_t n = scaled(1'000'000, scale);
    Worst w_psi, w_psi_d1, w_psi_d2;
    Worst w_psi_d1_neg, w_phi, w_phi_d1;
    Worst w_phi_d2, w_phi_d1_neg;
    parallel_chunks(n, [&](int w, std::uint64_t b, std::uint64_t e) {
      for (std::uint64_t i = b; i < e; ++i) {
        const double t = -5.0 + 10.0 * static_cast<double>(i) / (n - 1);
        w_psi.slots[w] = std::max(w_psi.slots[w], psi(t));
        w_psi_d1.slots[w] = std::max(w_psi_d1.slots[w], psi_d1(t));
        w_psi_d1_neg.slots[w] = std::max(w_psi_d1_neg.slots[w], -psi_d1(t));
        w_psi_d2.slots[w] = std::max(w_psi_d2.slots[w], std::abs(psi_d2(t)));
        w_phi.slots[w] = std::max(w_phi.slots[w], phi(t));
        w_phi_d1.slots[w] = std::max(w_phi_d1.slots[w], phi_d1(t));
        w_phi_d1_neg.slots[w] = std::max(w_phi_d1_neg.slots[w], -phi_d1(t));
        w_phi_d2.slots[w] = std::max(w_phi_d2.slots[w], std::abs(phi_d2(t)));
      }
    });
    rb.add("psi-sup", n, w_psi.merged(), kb.psi_max, 1e-9);
    rb.add("psi-d1-sup", n, w_psi_d1.merged(), kb.psi_d1_max, 1e-9);
    rb.add("psi-d1-nonneg", n, w_psi_d1_neg.merged(), 0.0);
    rb.add("psi-d2-sup", n, w_psi_d2.merged(), kb.psi_d2_max, 1e-9);
    rb.add("phi-sup", n, w_phi.merged(), kb.phi_max, 1e-9);
    rb.add("phi-d1-sup", n, w_phi_d1.merged(), kb.phi_d1_max, 1e-9);
    rb.add("phi-d1-nonneg", n, w_phi_d1_neg.merged(), 0.0);
    rb.add("phi-d2-sup", n, w_phi_d2.merged(), kb.phi_d2_max, 1e-9);
  }

  // Gamma grid over [0, 1] at 1e-6 resolution
  {
    const std::uint64_t n = scaled(1'000'000, scale) + 1;
    Worst plateau(0.0), d1_max, d1_neg, d2_max;
    parallel_chunks(n, [&](int w, std::uint64_t b, std::uint64_t e) {
      for (std::uint64_t i = b; i < e; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        const double g0 = gamma_ramp(t), g1 = gamma_ramp_d1(t), g2 = gamma_ramp_d2(t);
        if (t <= 0.25 && (g0 != 0.0 || g1 != 0.0)) plateau.slots[w] += 1.0;
        if (t >= 0.5 && (g0 != 1.0 || g1 != 0.0)) plateau.slots[w] += 1.0;
        d1_max.slots[w] = std::max(d1_max.slots[w], g1);
        d1_neg.slots[w] = std::max(d1_neg.slots[w], -g1);
        d2_max.slots[w] = std::max(d2_max.slots[w], std::abs(g2));
      }
    });
    double plateau_total = 0.0;
    for (double v : plateau.slots) plateau_total += v;
    rb.add("gamma-plateau-exact", n, plateau_total, 0.0);
    rb.add("gamma-d1-sup", n, d1_max.merged(), kb.gamma_d1_max, 1e-9);
    rb.add("gamma-d1-nonneg", n, d1_neg.merged(), 0.0);
    rb.add("gamma-d2-sup", n, d2_max.merged(), kb.gamma_d2_max, 1e-9);
  }

  // table vs direct quadrature
  {
    const std::uint64_t n = scaled(1000, scale);
    CounterRng rng(derive_key(seed, 11));
    double worst = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double t = rng.next_uniform(0.25, 0.5);
      worst = std::max(worst, std::abs(gamma_ramp(t) - gamma_by_quadrature(t)));
    }
    rb.add("gamma-normalization", n, worst, 1e-8);
  }
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> chain_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("chain");
  const ChainConstants cc;
  const ChainFunction chain(kChainT);
  const std::uint64_t n = scaled(1'000'000, scale);

  Worst min_value(1e300);  // min-merge via negation below
  Worst grad_sup, row_sum;
  Worst zero_chain_viol(0.0), large_grad_viol(0.0);

  parallel_chunks(n, [&](int w, std::uint64_t b, std::uint64_t e) {
    CounterRng rng(derive_key(seed, 100 + w));
    Point diag(kChainT), off(kChainT - 1);
    for (std::uint64_t i = b; i < e; ++i) {
      const Point x = uniform_point(rng, kChainT, -3.0, 3.0);
      min_value.slots[w] = std::min(min_value.slots[w], chain.value(x));
      const Point g = chain.gradient(x);
      grad_sup.slots[w] =
          std::max(grad_sup.slots[w], g.lpNorm<Eigen::Infinity>());
      if (progress(g, kZeroTol) > progress(x, 0.5) + 1)
        zero_chain_viol.slots[w] += 1.0;
      const int p1 = prog_above(x, 1.0);
      if (p1 < kChainT && !(std::abs(g[p1]) > cc.large_grad))
        large_grad_viol.slots[w] += 1.0;
      chain.hessian_bands(x, diag, off);
      const double rs = diag.lpNorm<Eigen::Infinity>() +
                        2.0 * off.lpNorm<Eigen::Infinity>();
      row_sum.slots[w] = std::max(row_sum.slots[w], rs);
    }
  });

  double probe_min = 1e300;
  for (double v : min_value.slots) probe_min = std::min(probe_min, v);
  const double gap = chain.value(Point::Zero(kChainT)) - probe_min;
  rb.add("gap-probe", n, gap, cc.delta0 * kChainT, 1e-9);
  rb.add("grad-sup-norm", n, grad_sup.merged(), cc.grad_inf, 1e-9);

  double zc = 0.0, lg = 0.0;
  for (double v : zero_chain_viol.slots) zc += v;
  for (double v : large_grad_viol.slots) lg += v;
  rb.add("zero-chain", n, zc, 0.0);
  rb.add("large-gradient", n, lg, 0.0);
  rb.add("hessian-row-sum", n, row_sum.merged(), cc.lip1, 1e-9);

  // sampled-pair Lipschitz ratio
  {
    const std::uint64_t pairs = scaled(100'000, scale);
    Worst ratio;
    parallel_chunks(pairs, [&](int w, std::uint64_t b, std::uint64_t e) {
      CounterRng rng(derive_key(seed, 200 + w));
      for (std::uint64_t i = b; i < e; ++i) {
        const Point x = uniform_point(rng, kChainT, -3.0, 3.0);
        const double dist = log_spaced(rng, 1e-4, 1.0);
        const Point y = x + dist * unit_direction(rng, kChainT);
        const double r =
            (chain.gradient(x) - chain.gradient(y)).norm() / (x - y).norm();
        ratio.slots[w] = std::max(ratio.slots[w], r);
      }
    });
    rb.add("pair-lipschitz", pairs, ratio.merged(), cc.lip1, 1e-9);
  }
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> theta_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("theta");
  constexpr int T = 12;
  const std::uint64_t n = scaled(100'000, scale);

  Worst grad_norm, sandwich(0.0);
  Worst lip_val, lip_grad;
  parallel_chunks(n, [&](int w, std::uint64_t b, std::uint64_t e) {
    CounterRng rng(derive_key(seed, 300 + w));
    for (std::uint64_t i = b; i < e; ++i) {
      const Point x = uniform_point(rng, T, -1.0, 1.0);
      const int j = 1 + static_cast<int>(rng.next_below(T));
      const double th = theta(j, x);
      grad_norm.slots[w] =
          std::max(grad_norm.slots[w], theta_gradient(j, x).norm());
      const double lower = j > progress(x, 0.25) ? 1.0 : 0.0;
      const double upper = j > progress(x, 0.5) ? 1.0 : 0.0;
      if (th < lower - 1e-12 || th > upper + 1e-12) sandwich.slots[w] += 1.0;
      const double dist = log_spaced(rng, 1e-4, 1.0);
      const Point y = x + dist * unit_direction(rng, T);
      const double d = (x - y).norm();
      lip_val.slots[w] =
          std::max(lip_val.slots[w], std::abs(th - theta(j, y)) / d);
      lip_grad.slots[w] = std::max(
          lip_grad.slots[w],
          (theta_gradient(j, x) - theta_gradient(j, y)).norm() / d);
    }
  });
  rb.add("grad-norm", n, grad_norm.merged(), 36.0, 1e-9);
  double sw = 0.0;
  for (double v : sandwich.slots) sw += v;
  rb.add("sandwich", n, sw, 0.0);
  rb.add("value-lipschitz", n, lip_val.merged(), 36.0, 1e-9);
  rb.add("grad-lipschitz", n, lip_grad.merged(), 1e4, 1e-6);

  // finite-difference consistency away from the plateau edges
  {
    const std::uint64_t pts = scaled(200, scale);
    CounterRng rng(derive_key(seed, 310));
    double worst = 0.0;
    for (std::uint64_t i = 0; i < pts; ++i) {
      const auto [x, j] = active_shell_sample(rng, T);
      const Point analytic = theta_gradient(j, x);
      const double h = 1e-6;
      for (int c = 0; c < T; ++c) {
        Point xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const double fd = (theta(j, xp) - theta(j, xm)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - analytic[c]) /
                                    (1.0 + std::abs(analytic[c])));
      }
    }
    rb.add("fd-consistency", pts, worst, 1e-4);
  }
  return rb.reports;
}

// --------------------------------------------------------------------------

CompressedInstance make_test_compressed(double p, std::uint64_t seed, int T = 6,
                                        int d = 24) {
  const double radius = 230.0 * std::sqrt(static_cast<double>(T));
  return CompressedInstance(ChainFunction(T), p, sample_rotation(d, T, seed),
                            radius, 0.2);
}

std::vector<AuditReport> estimator_variance_suite(double scale,
                                                  std::uint64_t seed) {
  ReportBuilder rb("variance");
  const ChainConstants cc;
  const ChainFunction chain(kChainT);

  const double p_values[] = {0.1, 0.5, 1.0};
  for (const double p : p_values) {
    const char* tag = p == 0.1 ? "p01" : p == 0.5 ? "p05" : "p1";
    const std::uint64_t n = scaled(1000, scale);
    for (const auto kind : {ChainEstimatorKind::Basic,
                            ChainEstimatorKind::Smooth,
                            ChainEstimatorKind::Stat}) {
      const StochasticOracle oracle = unscaled_chain_instance(kChainT, p, kind);
      CounterRng rng(derive_key(seed, 400 + static_cast<int>(kind) * 7 +
                                          static_cast<int>(p * 100)));
      double worst_bias = 0.0, worst_var = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) {
        const Point x = uniform_point(rng, kChainT, -2.0, 2.0);
        const auto [mean, var] = closed_form_moments(oracle, x);
        worst_bias =
            std::max(worst_bias, (mean - chain.gradient(x)).norm());
        worst_var = std::max(worst_var, var);
      }
      const char* name = kind == ChainEstimatorKind::Basic ? "basic"
                         : kind == ChainEstimatorKind::Smooth ? "smooth"
                                                              : "stat";
      const double var_bound = kind == ChainEstimatorKind::Stat
                                   ? 1e6 / p
                                   : cc.varsigma * cc.varsigma * (1.0 - p) / p;
      rb.add(std::string("unbiased-") + name + "-" + tag, n, worst_bias, 1e-8);
      rb.add(std::string("variance-") + name + "-" + tag, n, worst_var,
             var_bound, 1e-9);
    }
  }

  // compressed instance certificate
  {
    const double p = 0.5;
    const CompressedInstance ci = make_test_compressed(p, seed);
    const int d = ci.dimension();
    const std::uint64_t n = scaled(200, scale);
    CounterRng rng(derive_key(seed, 440));
    double worst_bias = 0.0, worst_var = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const Point x = uniform_point(rng, d, -5.0, 5.0);
      const Point mean = p * ci.estimate(x, 1) + (1.0 - p) * ci.estimate(x, 0);
      worst_bias = std::max(worst_bias, (mean - ci.mean_gradient(x)).norm());
      const double var =
          p * (ci.estimate(x, 1) - mean).squaredNorm() +
          (1.0 - p) * (ci.estimate(x, 0) - mean).squaredNorm();
      worst_var = std::max(worst_var, var);
    }
    rb.add("unbiased-compressed", n, worst_bias, 1e-8);
    rb.add("variance-compressed", n, worst_var,
           cc.varsigma * cc.varsigma * (1.0 - p) / p, 1e-9);
  }

  // zero-chain audit over (x, z) pairs, all families
  {
    const std::uint64_t per_family = scaled(250'000, scale);
    const double p = 0.25;
    Worst viol(0.0);
    for (int family = 0; family < 4; ++family) {
      parallel_chunks(per_family, [&](int w, std::uint64_t b, std::uint64_t e) {
        CounterRng rng(derive_key(seed, 450 + 10 * family + w));
        for (std::uint64_t i = b; i < e; ++i) {
          const Point x = uniform_point(rng, kChainT, -2.0, 2.0);
          const int prog = progress(x, 0.25);
          if (family < 3) {
            for (int z = 0; z <= 1; ++z) {
              const Point g = family == 0   ? g_basic(chain, p, x, z)
                              : family == 1 ? g_smooth(chain, p, x, z)
                                            : g_stat(chain, p, x, z);
              const int pg = progress(g, kZeroTol);
              if (pg > prog + 1) viol.slots[w] += 1.0;
              if (z == 0 && pg > prog) viol.slots[w] += 1.0;
            }
          } else {
            BitVector bits(kChainT);
            for (auto& bit : bits) bit = rng.next_bernoulli(p) ? 1 : 0;
            const Point g = g_coord(chain, p, x, bits);
            const int pg = progress(g, kZeroTol);
            if (pg > prog + 1) viol.slots[w] += 1.0;
            if (prog < kChainT && bits[prog] == 0 &&
                std::abs(g[prog]) > kZeroTol)
              viol.slots[w] += 1.0;
          }
        }
      });
    }
    double total = 0.0;
    for (double v : viol.slots) total += v;
    rb.add("zero-chain-all-estimators", 4 * per_family, total, 0.0);
  }
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> estimator_mss_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("mss");
  const ChainConstants cc;
  const ChainFunction chain(kChainT);
  const double p = 0.25;

  struct Case {
    const char* name;
    ChainEstimatorKind kind;
    double bound;
  };
  const Case cases[] = {
      {"smooth", ChainEstimatorKind::Smooth,
       cc.lip1_bar * cc.lip1_bar / p},
      {"stat", ChainEstimatorKind::Stat, (1e11 + cc.lip1 * cc.lip1) / p},
  };
  for (const Case& c : cases) {
    const std::uint64_t pairs = scaled(100'000, scale);
    Worst ratio;
    parallel_chunks(pairs, [&](int w, std::uint64_t b, std::uint64_t e) {
      CounterRng rng(derive_key(seed, 500 + static_cast<int>(c.kind) * 13 + w));
      for (std::uint64_t i = b; i < e; ++i) {
        const Point x = uniform_point(rng, kChainT, -1.0, 1.0);
        const double dist = log_spaced(rng, 1e-4, 1.0);
        const Point y = x + dist * unit_direction(rng, kChainT);
        double mss = 0.0;
        for (int z = 0; z <= 1; ++z) {
          const double wz = z == 1 ? p : 1.0 - p;
          const Point gx = c.kind == ChainEstimatorKind::Smooth
                               ? g_smooth(chain, p, x, z)
                               : g_stat(chain, p, x, z);
          const Point gy = c.kind == ChainEstimatorKind::Smooth
                               ? g_smooth(chain, p, y, z)
                               : g_stat(chain, p, y, z);
          mss += wz * (gx - gy).squaredNorm();
        }
        ratio.slots[w] =
            std::max(ratio.slots[w], mss / (x - y).squaredNorm());
      }
    });
    rb.add(std::string("pair-mss-") + c.name, pairs, ratio.merged(), c.bound,
           1e-6);
  }

  // compressed instance
  {
    const CompressedInstance ci = make_test_compressed(p, seed);
    const int d = ci.dimension();
    const std::uint64_t pairs = scaled(20'000, scale);
    Worst ratio;
    parallel_chunks(pairs, [&](int w, std::uint64_t b, std::uint64_t e) {
      CounterRng rng(derive_key(seed, 540 + w));
      for (std::uint64_t i = b; i < e; ++i) {
        const Point x = uniform_point(rng, d, -5.0, 5.0);
        const double dist = log_spaced(rng, 1e-4, 1.0);
        const Point y = x + dist * unit_direction(rng, d);
        double mss = 0.0;
        for (int z = 0; z <= 1; ++z) {
          const double wz = z == 1 ? p : 1.0 - p;
          mss += wz * (ci.estimate(x, z) - ci.estimate(y, z)).squaredNorm();
        }
        ratio.slots[w] =
            std::max(ratio.slots[w], mss / (x - y).squaredNorm());
      }
    });
    rb.add("pair-mss-compressed", pairs, ratio.merged(),
           cc.lip1_bar_rot * cc.lip1_bar_rot / p, 1e-6);
  }

  // discontinuity witness: the hard-gated estimator's two-point expectation
  // does not vanish across the 1/4 threshold
  {
    const auto curve = mss_witness(p);
    const double floor = (1.0 - p) * phi_d1(0.25) * phi_d1(0.25);
    const double at_tiny = curve.back().second;
    rb.add("witness-basic-floor", curve.size(), floor - at_tiny, 0.0, 1e-12);
    const auto smooth_curve = mss_witness_smooth(p);
    double worst = 0.0;
    for (const auto& [delta, ratio] : smooth_curve)
      worst = std::max(worst, ratio);
    rb.add("witness-smooth-bounded", smooth_curve.size(), worst,
           cc.lip1_bar * cc.lip1_bar / p, 1e-6);
  }
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> walker_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("walker");
  const int trials = std::max(100, static_cast<int>(scaled(1000, scale)));
  const auto res = hitting_time_sim(20, 0.05, 0.1, trials, seed);
  const double margin = 3.0 * std::sqrt(0.1 / trials);
  rb.add("hitting-failure-rate", trials, res.failure_rate, 0.1 + margin);
  const double expected_mean = 20 / 0.05;
  const double se = std::sqrt(20 * 0.95) / 0.05 / std::sqrt(trials);
  rb.add("hitting-mean", trials, std::abs(res.mean_hitting_time - expected_mean),
         3.0 * se);
  return rb.reports;
}

std::vector<AuditReport> active_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("active");
  {
    const auto eq = active_equivalence(3, 3);
    rb.add("pattern-counts-n3t3", eq.seeds,
           static_cast<double>(eq.worst_count_err), 0.0);
    rb.add("bit-marginals-n3t3", eq.seeds,
           static_cast<double>(eq.worst_marginal_err), 0.0);
  }
  {
    const auto eq = active_equivalence(2, 3);
    rb.add("pattern-counts-n2t3", eq.seeds,
           static_cast<double>(eq.worst_count_err), 0.0);
  }
  // greedy walker against the permuted finite-sum oracle: pooled progress
  // increments per round stay below 2p
  {
    const int runs = static_cast<int>(scaled(1000, scale));
    const int N = 20, T = 10;
    const int cap = 40 * N;  // comfortably beyond the N*T expected rounds
    std::vector<WalkerStats> stats(runs);
    parallel_chunks(runs, [&](int, std::uint64_t b, std::uint64_t e) {
      for (std::uint64_t r = b; r < e; ++r) {
        InstanceSpec spec;
        spec.kind = InstanceKind::Active;
        spec.N = N;
        spec.T = T;
        spec.seed = derive_key(seed, 600 + r);
        const StochasticOracle oracle = build_instance(spec);
        stats[r] = walker_stats(oracle, cap, derive_key(seed, 700 + r));
      }
    });
    double increments = 0.0, rounds = 0.0;
    for (const auto& s : stats) {
      increments += s.increments;
      rounds += s.rounds;
    }
    rb.add("walker-increment-rate", runs, increments / rounds, 2.0 / N);
  }
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> compression_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("compression");
  const ChainConstants cc;
  constexpr int T = 6, d = 24;
  const double R = 230.0 * std::sqrt(static_cast<double>(T));
  const CompressedInstance ci = make_test_compressed(0.5, seed, T, d);
  CounterRng rng(derive_key(seed, 800));
  const std::uint64_t n = scaled(2000, scale);

  double rho_lip = 0.0, jac_op = 0.0, jac_lip = 0.0, grad_lip = 0.0;
  double probe_min = 1e300;
  for (std::uint64_t i = 0; i < n; ++i) {
    // sample across scales: curvature of rho matters near and beyond R
    const double span = log_spaced(rng, 1.0, 2.0 * R);
    const Point x = uniform_point(rng, d, -span, span);
    const double dist = log_spaced(rng, 1e-4, 0.1 * R);
    const Point y = x + dist * unit_direction(rng, d);

    const SoftProjection px = soft_project(x, R);
    const SoftProjection py = soft_project(y, R);
    rho_lip = std::max(rho_lip, (px.rho - py.rho).norm() / (x - y).norm());

    const Point v = unit_direction(rng, d);
    jac_op = std::max(jac_op, px.apply_jacobian(v).norm());

    // ||J(x) - J(y)||_op exactly, via the symmetric eigendecomposition
    Eigen::MatrixXd jx = px.scale * (Eigen::MatrixXd::Identity(d, d) -
                                     px.rho * px.rho.transpose() / (R * R));
    Eigen::MatrixXd jy = py.scale * (Eigen::MatrixXd::Identity(d, d) -
                                     py.rho * py.rho.transpose() / (R * R));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jx - jy);
    const double op = std::max(std::abs(es.eigenvalues().minCoeff()),
                               std::abs(es.eigenvalues().maxCoeff()));
    jac_lip = std::max(jac_lip, op / (3.0 / R * (x - y).norm()));

    grad_lip = std::max(grad_lip, (ci.mean_gradient(x) - ci.mean_gradient(y))
                                          .norm() /
                                      (x - y).norm());
    probe_min = std::min(probe_min, ci.value(x));
  }
  rb.add("rho-lipschitz", n, rho_lip, 1.0, 1e-12);
  rb.add("jacobian-op-norm", n, jac_op, 1.0, 1e-12);
  rb.add("jacobian-lipschitz-ratio", n, jac_lip, 1.0, 1e-9);
  rb.add("value-grad-lipschitz", n, grad_lip, cc.lip1_rot, 1e-9);
  const double gap = ci.value(Point::Zero(d)) - probe_min;
  rb.add("gap", n, gap, cc.delta0 * T, 1e-9);
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> quadratic_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("quad");
  const double r = 2.0, lbar = 3.0, sigma2 = 4.0;
  const int s = -1, d = 5;
  InstanceSpec spec;
  spec.kind = InstanceKind::Quad;
  spec.quad_r = r;
  spec.quad_s = s;
  spec.smoothness = lbar;
  spec.sigma2 = sigma2;
  spec.d = d;
  const StochasticOracle oracle = build_instance(spec);
  CounterRng rng(derive_key(seed, 900));
  const std::uint64_t n = scaled(1000, scale);

  double linearity = 0.0, lip_dev = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point x = uniform_point(rng, d, -10.0, 10.0);
    const Point y = uniform_point(rng, d, -10.0, 10.0);
    const double z1 = rng.next_gaussian(), z2 = rng.next_gaussian();
    // estimator is affine in z with slope -lbar e1
    const Point dz = oracle.gradient_estimate(x, Seed{z1}) -
                     oracle.gradient_estimate(x, Seed{z2});
    Point expected = Point::Zero(d);
    expected[0] = -lbar * (z1 - z2);
    linearity = std::max(linearity, (dz - expected).norm());
    // gradient map is an exact isometry times lbar
    const double lhs = (oracle.gradient_estimate(x, Seed{z1}) -
                        oracle.gradient_estimate(y, Seed{z1}))
                           .norm();
    lip_dev = std::max(
        lip_dev, std::abs(lhs - lbar * (x - y).norm()) / (1.0 + lhs));
  }
  rb.add("linearity-in-seed", n, linearity, 1e-10);
  rb.add("exact-lipschitz", n, lip_dev, 1e-10);

  // variance = lbar^2 Var(z) = sigma2 exactly
  const double var = lbar * lbar * oracle.seed_distribution().variance();
  rb.add("variance-identity", 1, std::abs(var - sigma2), 1e-10);

  Point minimizer = Point::Zero(d);
  minimizer[0] = r * s;
  rb.add("grad-at-minimizer", 1,
         oracle.gradient_estimate(minimizer, Seed{r * double(s)}).norm(),
         1e-12);
  rb.add("grad-at-origin", 1,
         std::abs(oracle.mean_gradient(Point::Zero(d)).norm() - r * lbar),
         1e-10);
  return rb.reports;
}

// --------------------------------------------------------------------------

std::vector<AuditReport> finite_diff_suite(double scale, std::uint64_t seed) {
  ReportBuilder rb("fd");
  const ChainFunction chain(kChainT);
  const std::uint64_t n = scaled(1000, scale);
  const double h = 1e-5;

  {
    CounterRng rng(derive_key(seed, 1000));
    std::vector<Point> pts;
    for (std::uint64_t i = 0; i < n; ++i)
      pts.push_back(uniform_point(rng, kChainT, -2.0, 2.0));
    const double err = fd_gradient_check(
        [&](const Point& x) { return chain.value(x); },
        [&](const Point& x) { return chain.gradient(x); }, pts, h);
    rb.add("chain-gradient", n, err, 1e-4);
  }
  {
    CounterRng rng(derive_key(seed, 1001));
    const double p = 0.25;
    double worst = 0.0;
    for (int z = 0; z <= 1; ++z) {
      std::vector<Point> pts;
      for (std::uint64_t i = 0; i < n / 2; ++i)
        pts.push_back(uniform_point(rng, kChainT, -2.0, 2.0));
      worst = std::max(
          worst,
          fd_gradient_check(
              [&](const Point& x) { return f_stat_value(chain, p, x, z); },
              [&](const Point& x) { return g_stat(chain, p, x, z); }, pts, h));
    }
    rb.add("stat-gradient", n, worst, 1e-4);
  }
  {
    CounterRng rng(derive_key(seed, 1002));
    constexpr int T = 12;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto [x, j] = active_shell_sample(rng, T);
      const Point analytic = theta_gradient(j, x);
      for (int c = 0; c < T; ++c) {
        Point xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const double fd = (theta(j, xp) - theta(j, xm)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - analytic[c]) /
                                    (1.0 + std::abs(analytic[c])));
      }
    }
    rb.add("theta-gradient", n, worst, 1e-4);
  }
  {
    const CompressedInstance ci = make_test_compressed(0.5, seed);
    CounterRng rng(derive_key(seed, 1003));
    std::vector<Point> pts;
    const std::uint64_t m = std::max<std::uint64_t>(n / 4, 16);
    for (std::uint64_t i = 0; i < m; ++i)
      pts.push_back(uniform_point(rng, ci.dimension(), -20.0, 20.0));
    const double err = fd_gradient_check(
        [&](const Point& x) { return ci.value(x); },
        [&](const Point& x) { return ci.mean_gradient(x); }, pts, 1e-4);
    rb.add("compressed-mean-gradient", m, err, 1e-4);
  }
  return rb.reports;
}

}  // namespace

// --------------------------------------------------------------------------

std::vector<SuiteId> all_suites() {
  return {SuiteId::KernelBounds,      SuiteId::ChainFunction,
          SuiteId::ThetaGate,         SuiteId::EstimatorVariance,
          SuiteId::EstimatorMss,      SuiteId::Walker,
          SuiteId::ActiveOracle,      SuiteId::Compression,
          SuiteId::Quadratic,         SuiteId::FiniteDiff};
}

std::string to_string(SuiteId id) {
  switch (id) {
    case SuiteId::KernelBounds: return "kernels";
    case SuiteId::ChainFunction: return "chain";
    case SuiteId::ThetaGate: return "theta";
    case SuiteId::EstimatorVariance: return "variance";
    case SuiteId::EstimatorMss: return "mss";
    case SuiteId::Walker: return "walker";
    case SuiteId::ActiveOracle: return "active";
    case SuiteId::Compression: return "compression";
    case SuiteId::Quadratic: return "quad";
    case SuiteId::FiniteDiff: return "fd";
  }
  throw std::logic_error("unreachable");
}

SuiteId suite_from_string(const std::string& name) {
  for (SuiteId id : all_suites()) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown suite: " + name);
}

std::vector<AuditReport> run_suite(SuiteId id, double budget_scale,
                                   std::uint64_t seed) {
  switch (id) {
    case SuiteId::KernelBounds: return kernel_bounds_suite(budget_scale, seed);
    case SuiteId::ChainFunction: return chain_suite(budget_scale, seed);
    case SuiteId::ThetaGate: return theta_suite(budget_scale, seed);
    case SuiteId::EstimatorVariance:
      return estimator_variance_suite(budget_scale, seed);
    case SuiteId::EstimatorMss: return estimator_mss_suite(budget_scale, seed);
    case SuiteId::Walker: return walker_suite(budget_scale, seed);
    case SuiteId::ActiveOracle: return active_suite(budget_scale, seed);
    case SuiteId::Compression: return compression_suite(budget_scale, seed);
    case SuiteId::Quadratic: return quadratic_suite(budget_scale, seed);
    case SuiteId::FiniteDiff: return finite_diff_suite(budget_scale, seed);
  }
  throw std::logic_error("unreachable");
}

double fd_gradient_check(const std::function<double(const Point&)>& value,
                         const std::function<Point(const Point&)>& gradient,
                         const std::vector<Point>& points, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient_check: h must be > 0");
  double worst = 0.0;
  for (const Point& x : points) {
    const Point analytic = gradient(x);
    for (int c = 0; c < x.size(); ++c) {
      Point xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const double fd = (value(xp) - value(xm)) / (2.0 * h);
      worst = std::max(
          worst, std::abs(fd - analytic[c]) / (1.0 + std::abs(analytic[c])));
    }
  }
  return worst;
}

HittingTimeResult hitting_time_sim(int T, double p, double delta, int trials,
                                   std::uint64_t seed) {
  if (trials < 100)
    throw std::invalid_argument("hitting_time_sim: trials must be >= 100");
  const StochasticOracle oracle =
      unscaled_chain_instance(T, p, ChainEstimatorKind::Basic);
  const double threshold =
      std::floor((T - std::log(1.0 / delta)) / (2.0 * p));
  const int cap = static_cast<int>(50.0 * T / p);
  std::vector<int> hits(trials, 0);
  parallel_chunks(trials, [&](int, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t t = b; t < e; ++t) {
      hits[t] = walker_hitting_time(oracle, cap, derive_key(seed, 9000 + t));
    }
  });
  HittingTimeResult res;
  res.trials = trials;
  res.threshold_rounds = threshold;
  double sum = 0.0;
  int finished = 0, failures = 0;
  for (int h : hits) {
    if (h > 0) {
      sum += h;
      ++finished;
      if (h <= threshold) ++failures;
    }
  }
  res.failure_rate = static_cast<double>(failures) / trials;
  res.mean_hitting_time = finished > 0 ? sum / finished : 0.0;
  return res;
}

ActiveEquivalenceResult active_equivalence(int N, int T) {
  ActiveEquivalenceResult res;
  std::uint64_t size = 1;
  for (int i = 0; i < T; ++i) {
    size *= static_cast<std::uint64_t>(N);
    if (size > 1'000'000)
      throw std::invalid_argument("active_equivalence: N^T too large");
  }
  res.seeds = size;
  // any permutation must preserve the counts; use a shuffled one
  const Permutation pi = Permutation::shuffled(size, 0x5eedULL);

  std::vector<std::uint64_t> pattern_count(std::uint64_t{1} << T, 0);
  std::vector<std::uint64_t> ones_per_bit(T, 0);
  for (std::uint64_t k = 1; k <= size; ++k) {
    const BitVector bits = zeta(pi(k), N, T);
    std::uint64_t code = 0;
    for (int j = 0; j < T; ++j) {
      if (bits[j]) {
        code |= std::uint64_t{1} << j;
        ++ones_per_bit[j];
      }
    }
    ++pattern_count[code];
  }
  // expected multiplicity of pattern b is (N-1)^{#zeros(b)}
  res.worst_count_err = 0;
  for (std::uint64_t code = 0; code < pattern_count.size(); ++code) {
    std::uint64_t expected = 1;
    for (int j = 0; j < T; ++j) {
      if (!(code & (std::uint64_t{1} << j)))
        expected *= static_cast<std::uint64_t>(N - 1);
    }
    const std::uint64_t got = pattern_count[code];
    const std::uint64_t err = got > expected ? got - expected : expected - got;
    res.worst_count_err = std::max(res.worst_count_err, err);
  }
  std::uint64_t marginal = 1;
  for (int i = 0; i < T - 1; ++i) marginal *= static_cast<std::uint64_t>(N);
  res.worst_marginal_err = 0;
  for (int j = 0; j < T; ++j) {
    const std::uint64_t got = ones_per_bit[j];
    const std::uint64_t err = got > marginal ? got - marginal : marginal - got;
    res.worst_marginal_err = std::max(res.worst_marginal_err, err);
  }
  res.pass = res.worst_count_err == 0 && res.worst_marginal_err == 0;
  return res;
}

std::vector<std::pair<double, double>> mss_witness(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("mss_witness: p must be in (0, 1)");
  const ChainFunction chain(3);
  std::vector<std::pair<double, double>> curve;
  // y sits just past the threshold so its second coordinate is on the
  // clean branch; x approaches from the noisy side
  Point y(3);
  y << 1.0, std::nextafter(0.25, 1.0), 0.0;
  for (double delta = 1e-1; delta >= 0.9e-6; delta *= 0.1) {
    Point x(3);
    x << 1.0, 0.25 - delta, 0.0;
    double value = 0.0;
    for (int z = 0; z <= 1; ++z) {
      const double w = z == 1 ? p : 1.0 - p;
      value += w * (g_basic(chain, p, x, z) - g_basic(chain, p, y, z))
                       .squaredNorm();
    }
    curve.emplace_back(delta, value);
  }
  return curve;
}

std::vector<std::pair<double, double>> mss_witness_smooth(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("mss_witness_smooth: p must be in (0, 1)");
  const ChainFunction chain(3);
  std::vector<std::pair<double, double>> curve;
  Point y(3);
  y << 1.0, 0.25, 0.0;
  for (double delta = 1e-1; delta >= 0.9e-6; delta *= 0.1) {
    Point x(3);
    x << 1.0, 0.25 - delta, 0.0;
    double value = 0.0;
    for (int z = 0; z <= 1; ++z) {
      const double w = z == 1 ? p : 1.0 - p;
      value += w * (g_smooth(chain, p, x, z) - g_smooth(chain, p, y, z))
                       .squaredNorm();
    }
    curve.emplace_back(delta, value / (x - y).squaredNorm());
  }
  return curve;
}

}  // namespace pzc
