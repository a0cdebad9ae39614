#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pzc/audit.hpp"
#include "pzc/transforms.hpp"

using namespace pzc;

namespace {

Point random_point(CounterRng& rng, int n, double lo, double hi) {
  Point x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.next_uniform(lo, hi);
  return x;
}

}  // namespace

TEST_CASE("bounded-variance scaling recipe") {
  const ScaleParams sp = scale_params_bounded_variance(0.5, 18240.0, 1.0, 52900.0);
  CHECK(sp.lambda == doctest::Approx(152.0).epsilon(1e-12));
  CHECK(sp.T == 10);
  CHECK(sp.p == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(sp.lower_bound_rounds == doctest::Approx(450.0).epsilon(1e-12));

  // small sigma saturates the release probability at 1
  CHECK(scale_params_bounded_variance(0.5, 18240.0, 1.0, 100.0).p == 1.0);

  // infeasible accuracy carries the maximal feasible eps
  try {
    scale_params_bounded_variance(2.0, 18240.0, 1.0, 52900.0);
    CHECK(false);
  } catch (const InfeasibleError& e) {
    CHECK(e.max_feasible_eps ==
          doctest::Approx(std::sqrt(18240.0 / 21888.0)).epsilon(1e-12));
  }
  CHECK_THROWS(scale_params_bounded_variance(-1.0, 1.0, 1.0, 1.0));
}

TEST_CASE("mean-squared smooth scaling recipe") {
  // p = 1 case pins the effective smoothness ratio
  const ScaleParams sat = scale_params_mss(0.1, 100.0, 10.0, 0.2);
  CHECK(sat.p == 1.0);
  CHECK(sat.l_effective == doctest::Approx(152.0 / 328.0 * 10.0).epsilon(1e-12));

  const ScaleParams sp = scale_params_mss(0.1, 100.0, 10.0, 100.0);
  CHECK(sp.p == doctest::Approx(0.2116).epsilon(1e-12));
  CHECK(sp.l_effective ==
        doctest::Approx(152.0 / 328.0 * 10.0 * std::sqrt(0.2116)).epsilon(1e-12));
  CHECK(sp.lambda ==
        doctest::Approx(152.0 / sp.l_effective * 0.2).epsilon(1e-12));
  CHECK(sp.T == static_cast<int>(std::floor(
                    sp.l_effective * 100.0 / (12.0 * 152.0 * 0.04))));

  CounterRng rng(7);
  for (int i = 0; i < 100; ++i) {
    const double lbar = rng.next_uniform(0.5, 20.0);
    const double s2 = rng.next_uniform(0.5, 500.0);
    const double eps = rng.next_uniform(0.01, 0.05);
    const ScaleParams r = scale_params_mss(eps, 1000.0, lbar, s2);
    CHECK(r.l_effective <= lbar + 1e-12);
  }
}

TEST_CASE("randomized scaling recipe uses the rotated constants") {
  const ScaleParams sp = scale_params_randomized(0.25, 7440.0, 1.0, 21160.0);
  CHECK(sp.lambda == doctest::Approx(155.0).epsilon(1e-12));
  CHECK(sp.T == 4);
  CHECK(sp.p == doctest::Approx(0.025).epsilon(1e-12));
  CHECK_THROWS_AS(scale_params_randomized(5.0, 7440.0, 1.0, 21160.0),
                  InfeasibleError);
}

TEST_CASE("haar rotation sampling") {
  const RotationMatrix u = sample_rotation(5, 2, 42);
  const Eigen::MatrixXd gram =
      u.columns.transpose() * u.columns - Eigen::MatrixXd::Identity(2, 2);
  CHECK(gram.cwiseAbs().maxCoeff() <= 1e-10);

  // determinism: identical seed gives a bit-identical matrix
  const RotationMatrix v = sample_rotation(5, 2, 42);
  CHECK((u.columns - v.columns).cwiseAbs().maxCoeff() == 0.0);
  const RotationMatrix w = sample_rotation(5, 2, 43);
  CHECK((u.columns - w.columns).cwiseAbs().maxCoeff() > 0.0);

  // square case is a full orthogonal matrix
  const RotationMatrix sq = sample_rotation(4, 4, 9);
  CHECK((sq.columns.transpose() * sq.columns -
         Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK_THROWS(sample_rotation(2, 3, 1));
}

TEST_CASE("rotation first-coordinate law matches the sphere marginal") {
  // u1'v/|v| for Haar u is the first coordinate of a uniform point on the
  // d-1 sphere; at d = 5 its CDF is the smoothstep 3u^2 - 2u^3, u=(x+1)/2
  const int d = 5, n = 10000;
  Point v(d);
  v << 1.0, -2.0, 0.5, 3.0, -1.0;
  std::vector<double> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const RotationMatrix u = sample_rotation(d, 2, 1000 + i);
    xs.push_back(u.columns.col(0).dot(v) / v.norm());
  }
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double uu = (xs[i] + 1.0) / 2.0;
    const double cdf = uu * uu * (3.0 - 2.0 * uu);
    ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
  }
  // two-sided KS critical value at p = 0.01
  CHECK(ks <= 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("soft projection") {
  const SoftProjection at_zero = soft_project(Point::Zero(4), 10.0);
  CHECK(at_zero.rho.norm() == 0.0);
  Point v(4);
  v << 1.0, -2.0, 0.0, 0.5;
  CHECK((at_zero.apply_jacobian(v) - v).norm() <= 1e-14);

  // on the sphere of radius R the projection halves the squared norm
  Point x(4);
  x << 10.0, 0.0, 0.0, 0.0;
  const SoftProjection on_r = soft_project(x, 10.0);
  CHECK((on_r.rho - x / std::sqrt(2.0)).norm() <= 1e-12);

  CounterRng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double r = 20.0;
    const Point a = random_point(rng, 4, -60.0, 60.0);
    const Point b = random_point(rng, 4, -60.0, 60.0);
    const SoftProjection pa = soft_project(a, r);
    CHECK(pa.rho.norm() < r);
    CHECK((pa.rho - soft_project(b, r).rho).norm() <= (a - b).norm() + 1e-12);
  }
  CHECK_THROWS(soft_project(x, 0.0));
}

TEST_CASE("required dimension formula") {
  // frozen from an independent scripted evaluation of
  // ceil(18 * 230^2 * K T^2 / p * ln(2 K T^2 / (p delta)))
  CHECK(required_dimension(1, 4, 0.25, 0.5) == 337927550.0);
  const double base = required_dimension(1, 4, 0.25, 0.5);
  CHECK(required_dimension(2, 4, 0.25, 0.5) > 2.0 * base);  // strictly
  CHECK(required_dimension(1, 8, 0.25, 0.5) > base);
  CHECK(required_dimension(1, 4, 0.1, 0.5) > base);
  CHECK(required_dimension(1, 4, 0.25, 0.2) > base);
  // explicit R reproduces the generic form
  CHECK(required_dimension(1, 4, 0.25, 0.5, 230.0 * 2.0) == base);
  CHECK_THROWS(required_dimension(1, 4, 0.25, 1.5));
}

TEST_CASE("compressed instance evaluation") {
  const int T = 4, d = 12;
  CompressedInstance ci(ChainFunction(T), 0.5, sample_rotation(d, T, 3),
                        230.0 * std::sqrt(4.0), 0.2);
  // at the origin the projection and regularizer drop out
  const ChainFunction chain(T);
  CHECK(ci.value(Point::Zero(d)) ==
        doctest::Approx(chain.value(Point::Zero(T))).epsilon(1e-12));
  const Point mean0 = ci.mean_gradient(Point::Zero(d));
  const Point expected0 = ci.rotation().columns * chain.gradient(Point::Zero(T));
  CHECK((mean0 - expected0).norm() <= 1e-12);

  CounterRng rng(13);
  for (int i = 0; i < 200; ++i) {
    const Point x = random_point(rng, d, -10.0, 10.0);
    const double p = ci.p();
    const Point mix = p * ci.estimate(x, 1) + (1.0 - p) * ci.estimate(x, 0);
    CHECK((mix - ci.mean_gradient(x)).norm() <= 1e-8);
  }
  const auto [val, grad] = compressed_eval(ci, Point::Zero(d), 1);
  CHECK(val == ci.value(Point::Zero(d)));
  CHECK_THROWS(ci.value(Point::Zero(d + 1)));
}

TEST_CASE("rotation consistency of the composed gradient") {
  // grad of F o U' equals U grad F(U'x), checked against finite differences
  const int T = 3, d = 8;
  const RotationMatrix u = sample_rotation(d, T, 21);
  const ChainFunction chain(T);
  CounterRng rng(17);
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(random_point(rng, d, -2.0, 2.0));
  const double err = fd_gradient_check(
      [&](const Point& x) { return chain.value(u.columns.transpose() * x); },
      [&](const Point& x) -> Point {
        return u.columns * chain.gradient(u.columns.transpose() * x);
      },
      pts, 1e-5);
  CHECK(err <= 1e-5);
}

TEST_CASE("instance spec round trip and builders") {
  InstanceSpec spec;
  spec.kind = InstanceKind::ZrBv;
  spec.eps = 0.5;
  spec.delta = 18240.0;
  spec.smoothness = 1.0;
  spec.sigma2 = 52900.0;
  spec.seed = 5;
  const InstanceSpec back = instance_from_kv(instance_kv(spec));
  CHECK(back.kind == spec.kind);
  CHECK(back.eps == spec.eps);
  CHECK(back.sigma2 == spec.sigma2);
  CHECK(back.seed == spec.seed);

  const StochasticOracle oracle = build_instance(spec);
  const auto& cert = oracle.certificate();
  CHECK(cert.T == 10);
  CHECK(cert.p == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(oracle.geometry().lambda == doctest::Approx(152.0).epsilon(1e-12));
  // declared initial gap: delta0 * T * value_scale
  CHECK(cert.delta_bound ==
        doctest::Approx(12.0 * 10 * (152.0 * 152.0 / 152.0)).epsilon(1e-12));

  // certificate soundness by closed-form audit
  CounterRng rng(19);
  for (int i = 0; i < 100; ++i) {
    const Point x = random_point(rng, 10, -300.0, 300.0);
    const auto [mean, var] = closed_form_moments(oracle, x);
    CHECK((mean - oracle.mean_gradient(x)).norm() <= 1e-8);
    CHECK(var <= cert.variance_bound + 1e-9);
  }
}

TEST_CASE("quad instance gradient scale at the origin") {
  InstanceSpec spec;
  spec.kind = InstanceKind::Quad;
  spec.quad_r = 2.0;
  spec.quad_s = -1;
  spec.smoothness = 3.0;
  spec.sigma2 = 4.0;
  spec.d = 6;
  const StochasticOracle oracle = build_instance(spec);
  CHECK(oracle.mean_gradient(Point::Zero(6)).norm() ==
        doctest::Approx(2.0 * 3.0).epsilon(1e-12));
}

TEST_CASE("rotated instance keeps certificates") {
  InstanceSpec spec;
  spec.kind = InstanceKind::RandBv;
  spec.eps = 0.25;
  spec.delta = 7440.0;
  spec.smoothness = 1.0;
  spec.sigma2 = 21160.0;
  spec.seed = 2;
  const StochasticOracle oracle = build_instance(spec);
  CHECK(oracle.certificate().T == 4);
  CHECK(oracle.dimension() == 16);  // default 4T
  CHECK(oracle.geometry().rotation.rows() == 16);

  CounterRng rng(23);
  for (int i = 0; i < 50; ++i) {
    const Point x = random_point(rng, 16, -100.0, 100.0);
    const auto [mean, var] = closed_form_moments(oracle, x);
    CHECK((mean - oracle.mean_gradient(x)).norm() <= 1e-8);
    CHECK(var <= oracle.certificate().variance_bound + 1e-9);
  }
}

TEST_CASE("unscaled chain instances carry the right certificates") {
  const StochasticOracle stat =
      unscaled_chain_instance(6, 0.25, ChainEstimatorKind::Stat);
  CHECK(stat.certificate().variance_bound == doctest::Approx(4e6));
  CHECK(stat.certificate().delta_bound == doctest::Approx(72.0));
  const StochasticOracle smooth =
      unscaled_chain_instance(6, 0.25, ChainEstimatorKind::Smooth);
  CHECK(smooth.certificate().mss == doctest::Approx(328.0 / 0.5));
}

TEST_CASE("scaled instance keeps a large gradient while incomplete") {
  InstanceSpec spec;
  spec.kind = InstanceKind::ZrBv;
  spec.eps = 0.5;
  spec.delta = 18240.0;
  spec.smoothness = 1.0;
  spec.sigma2 = 52900.0;
  const StochasticOracle oracle = build_instance(spec);
  const double lambda = oracle.geometry().lambda;
  const int T = oracle.certificate().T;
  CounterRng rng(29);
  for (int i = 0; i < 2000; ++i) {
    const Point x = random_point(rng, T, -2.0 * lambda, 2.0 * lambda);
    int p1 = 0;
    for (int c = T - 1; c >= 0; --c) {
      if (std::abs(x[c] / lambda) > 1.0) {
        p1 = c + 1;
        break;
      }
    }
    if (p1 < T) CHECK(oracle.mean_gradient(x).norm() > 2.0 * spec.eps);
  }
}
