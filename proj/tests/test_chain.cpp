#include <doctest.h>

#include <cmath>

#include "pzc/audit.hpp"
#include "pzc/chain.hpp"
#include "pzc/kernels.hpp"
#include "pzc/rng.hpp"

using namespace pzc;

namespace {

Point random_point(CounterRng& rng, int n, double lo, double hi) {
  Point x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.next_uniform(lo, hi);
  return x;
}

}  // namespace

TEST_CASE("progress") {
  CHECK(progress(Point::Zero(4), 0.3) == 0);
  CHECK(progress(Point::Zero(1), 0.0) == 0);
  Point x(3);
  x << 1.0, 0.6, 0.3;
  CHECK(progress(x, 0.5) == 2);
  Point y(3);
  y << 0.2, 0.9, 0.0;
  CHECK(progress(y, 0.0) == 2);
  CHECK_THROWS(progress(x, 1.0));
  CHECK_THROWS(progress(x, -0.1));
}

TEST_CASE("support") {
  CHECK(support(Point::Zero(3)).empty());
  Point x(3);
  x << 0.0, 3.0, 0.0;
  CHECK(support(x) == std::vector<int>{2});
  // the top progress coordinate is always in the support
  CounterRng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Point p = random_point(rng, 6, -1.0, 1.0);
    const int prog = progress(p, 0.0);
    if (prog >= 1) {
      const auto s = support(p, 0.0);
      CHECK(std::find(s.begin(), s.end(), prog) != s.end());
    }
  }
}

TEST_CASE("chain value anchors") {
  // all sum terms vanish at 0, leaving -Psi(1) Phi(0) = -sqrt(pi e / 2)
  const ChainFunction f5(5);
  CHECK(f5.value(Point::Zero(5)) ==
        doctest::Approx(-2.0663656770612464).epsilon(1e-12));
  // T=2 at (1,1): Psi(-1) = 0 and Psi(1) = 1 leave -2 Phi(1)
  const ChainFunction f2(2);
  Point ones(2);
  ones << 1.0, 1.0;
  CHECK(f2.value(ones) == doctest::Approx(-2.0 * phi(1.0)).epsilon(1e-12));
  // T=1: empty sum, value is -Phi(t)
  const ChainFunction f1(1);
  CounterRng rng(17);
  for (int i = 0; i < 20; ++i) {
    Point t(1);
    t << rng.next_uniform(-2.0, 2.0);
    CHECK(f1.value(t) == doctest::Approx(-phi(t[0])).epsilon(1e-12));
  }
  CHECK_THROWS(f5.value(Point::Zero(4)));
}

TEST_CASE("chain gradient at origin and zero-chain property") {
  const ChainFunction f(5);
  const Point g0 = f.gradient(Point::Zero(5));
  CHECK(g0[0] == doctest::Approx(-std::sqrt(2.718281828459045)).epsilon(1e-12));
  for (int i = 1; i < 5; ++i) CHECK(g0[i] == 0.0);

  CounterRng rng(23);
  for (int i = 0; i < 2000; ++i) {
    const Point x = random_point(rng, 5, -2.0, 2.0);
    const Point g = f.gradient(x);
    CHECK(progress(g, kZeroTol) <= progress(x, 0.5) + 1);
  }
}

TEST_CASE("chain gradient matches finite differences") {
  const ChainFunction f(8);
  CounterRng rng(29);
  std::vector<Point> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(random_point(rng, 8, -2.0, 2.0));
  const double err = fd_gradient_check(
      [&](const Point& x) { return f.value(x); },
      [&](const Point& x) { return f.gradient(x); }, pts, 1e-5);
  CHECK(err <= 1e-5);
}

TEST_CASE("hessian bands: off-diagonal at origin, row sums, FD") {
  const ChainFunction f(3);
  Point diag, off;
  f.hessian_bands(Point::Zero(3), diag, off);
  CHECK(off.size() == 2);
  CHECK(std::abs(off[0]) <= 1e-12);
  CHECK(std::abs(off[1]) <= 1e-12);

  const ChainConstants cc;
  CounterRng rng(31);
  const ChainFunction f8(8);
  for (int i = 0; i < 500; ++i) {
    const Point x = random_point(rng, 8, -3.0, 3.0);
    f8.hessian_bands(x, diag, off);
    const double row_sum = diag.lpNorm<Eigen::Infinity>() +
                           2.0 * off.lpNorm<Eigen::Infinity>();
    CHECK(row_sum <= cc.lip1 + 1e-9);
  }

  // bands vs finite differences of the gradient
  const double h = 1e-5;
  for (int i = 0; i < 30; ++i) {
    const Point x = random_point(rng, 8, -2.0, 2.0);
    f8.hessian_bands(x, diag, off);
    for (int c = 0; c < 8; ++c) {
      Point xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Point fd = (f8.gradient(xp) - f8.gradient(xm)) / (2.0 * h);
      CHECK(std::abs(fd[c] - diag[c]) <= 1e-4 * (1.0 + std::abs(diag[c])));
      if (c + 1 < 8)
        CHECK(std::abs(fd[c + 1] - off[c]) <= 1e-4 * (1.0 + std::abs(off[c])));
      // tridiagonal: nothing beyond the first off-diagonal
      if (c + 2 < 8) CHECK(std::abs(fd[c + 2]) <= 1e-6);
    }
  }
}

TEST_CASE("suboptimality gap stays within delta0 per link") {
  const ChainConstants cc;
  CounterRng rng(37);
  for (int T = 1; T <= 12; T += 3) {
    const ChainFunction f(T);
    double probe_min = f.value(Point::Zero(T));
    for (int i = 0; i < 20000; ++i) {
      probe_min = std::min(probe_min, f.value(random_point(rng, T, -3.0, 3.0)));
    }
    CHECK(f.value(Point::Zero(T)) - probe_min <= cc.delta0 * T + 1e-9);
  }
}

TEST_CASE("theta values and sandwich") {
  Point zero = Point::Zero(4);
  for (int j = 1; j <= 4; ++j) CHECK(theta(j, zero) == 1.0);
  Point x(2);
  x << 0.7, 0.0;
  CHECK(theta(1, x) == 0.0);  // j at or below prog_{1/2}

  CounterRng rng(41);
  for (int i = 0; i < 2000; ++i) {
    Point p(6);
    for (int c = 0; c < 6; ++c) p[c] = rng.next_uniform(-1.0, 1.0);
    const int j = 1 + static_cast<int>(rng.next_below(6));
    const double th = theta(j, p);
    const double lower = j > progress(p, 0.25) ? 1.0 : 0.0;
    const double upper = j > progress(p, 0.5) ? 1.0 : 0.0;
    CHECK(th >= lower - 1e-12);
    CHECK(th <= upper + 1e-12);
    CHECK(theta_all(p)[j - 1] == doctest::Approx(th).epsilon(1e-15));
  }
  CHECK_THROWS(theta(0, zero));
  CHECK_THROWS(theta(5, zero));
}

TEST_CASE("theta gradient: zero branch, norm bound, prefix zeros") {
  CHECK(theta_gradient(2, Point::Zero(5)).norm() == 0.0);
  CounterRng rng(43);
  for (int i = 0; i < 2000; ++i) {
    Point p(6);
    for (int c = 0; c < 6; ++c) p[c] = rng.next_uniform(-1.0, 1.0);
    const int j = 1 + static_cast<int>(rng.next_below(6));
    const Point g = theta_gradient(j, p);
    CHECK(g.norm() <= 36.0 + 1e-9);
    for (int c = 0; c < j - 1; ++c) CHECK(g[c] == 0.0);
  }
}

TEST_CASE("link terms") {
  const LinkTerms zero = link_terms(0.0, 0.0);
  CHECK(zero.H == 0.0);
  CHECK(zero.h1 == 0.0);
  CHECK(zero.h2 == 0.0);

  const LinkTerms lt = link_terms(1.0, 0.0);
  CHECK(lt.H == doctest::Approx(-phi(0.0)).epsilon(1e-14));
  CHECK(lt.h1 == doctest::Approx(std::sqrt(2.718281828459045)).epsilon(1e-14));
  // psi'(-1) = 0 but psi'(1) = 4, so h2 = 4 phi(0)
  CHECK(lt.h2 == doctest::Approx(4.0 * phi(0.0)).epsilon(1e-14));

  CounterRng rng(47);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.next_uniform(-2.0, 2.0);
    const double b = rng.next_uniform(-2.0, 2.0);
    CHECK(link_terms(-a, -b).H == doctest::Approx(-link_terms(a, b).H)
                                      .epsilon(1e-12));
    // magnitude caps used by the statistical-oracle analysis
    CHECK(std::abs(link_terms(a, b).H) <= 12.0);
    CHECK(std::abs(link_terms(a, b).h1) <= 5.0);
    CHECK(std::abs(link_terms(a, b).h2) <= 20.0);
  }
}

TEST_CASE("gradient sup-norm bound") {
  const ChainConstants cc;
  const ChainFunction f(10);
  CounterRng rng(53);
  for (int i = 0; i < 5000; ++i) {
    const Point x = random_point(rng, 10, -3.0, 3.0);
    CHECK(f.gradient(x).lpNorm<Eigen::Infinity>() <= cc.grad_inf + 1e-9);
  }
}

TEST_CASE("large-gradient clause while the chain is incomplete") {
  const ChainFunction f(6);
  CounterRng rng(59);
  for (int i = 0; i < 5000; ++i) {
    const Point x = random_point(rng, 6, -3.0, 3.0);
    int p1 = 0;
    for (int c = 5; c >= 0; --c) {
      if (std::abs(x[c]) > 1.0) {
        p1 = c + 1;
        break;
      }
    }
    if (p1 < 6) CHECK(std::abs(f.gradient(x)[p1]) > 1.0);
  }
}

TEST_CASE("theta lipschitz pair bounds") {
  CounterRng rng(61);
  for (int i = 0; i < 1000; ++i) {
    Point x(6), y(6);
    for (int c = 0; c < 6; ++c) {
      x[c] = rng.next_uniform(-1.0, 1.0);
      y[c] = x[c] + rng.next_uniform(-0.2, 0.2);
    }
    const int j = 1 + static_cast<int>(rng.next_below(6));
    const double d = (x - y).norm();
    if (d == 0.0) continue;
    CHECK(std::abs(theta(j, x) - theta(j, y)) <= 36.0 * d + 1e-12);
    CHECK((theta_gradient(j, x) - theta_gradient(j, y)).norm() <=
          1e4 * d + 1e-9);
  }
}
