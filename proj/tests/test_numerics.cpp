#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/expr.hpp"
#include "foliage/grid.hpp"
#include "foliage/numerics.hpp"

using namespace foliage;

namespace {
constexpr double kTau = 6.283185307179586476925286766559;
}

TEST_CASE("pairwise sum is exact and order-stable") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
  CHECK(pairwise_sum(v) == pairwise_sum(v));
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(0, 0) == 1.0);
  CHECK(binomial(5, 0) == 1.0);
  CHECK(binomial(5, 5) == 1.0);
  CHECK(binomial(10, 3) == 120.0);
  CHECK(binomial(30, 15) == 155117520.0);
  CHECK(binomial(52, 5) == 2598960.0);
  CHECK(binomial(4, 7) == 0.0);
  CHECK(binomial(4, -1) == 0.0);
}

TEST_CASE("richardson first derivative") {
  auto f = [](double t) { return std::sin(t); };
  CHECK(std::abs(richardson_d1(f, 0.3, 1e-3) - std::cos(0.3)) < 1e-11);
  auto g = [](double t) { return std::exp(2.0 * t); };
  CHECK(std::abs(richardson_d1(g, 0.5, 1e-3) - 2.0 * std::exp(1.0)) < 1e-9);
}

TEST_CASE("richardson second derivative") {
  auto f = [](double t) { return std::sin(t); };
  CHECK(std::abs(richardson_d2(f, 0.3, 1e-3) + std::sin(0.3)) < 1e-8);
  auto g = [](double t) { return std::cosh(0.5 * t); };
  CHECK(std::abs(richardson_d2(g, 1.0, 1e-3) - 0.25 * std::cosh(0.5)) < 1e-8);
}

TEST_CASE("finite difference weights reproduce classic stencils") {
  Eigen::VectorXd nodes(5);
  nodes << -2, -1, 0, 1, 2;
  Eigen::MatrixXd c = fd_weights(0.0, nodes, 2);
  REQUIRE(c.rows() == 3);
  REQUIRE(c.cols() == 5);
  double d1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  for (int k = 0; k < 5; ++k) {
    CHECK(std::abs(c(1, k) - d1[k]) < 1e-13);
    CHECK(std::abs(c(2, k) - d2[k]) < 1e-13);
  }

  Eigen::VectorXd oneside(6);
  oneside << 0, 1, 2, 3, 4, 5;
  Eigen::MatrixXd e = fd_weights(0.0, oneside, 1);
  double d1e[6] = {-137.0 / 60, 5.0, -5.0, 10.0 / 3, -5.0 / 4, 1.0 / 5};
  for (int k = 0; k < 6; ++k) CHECK(std::abs(e(1, k) - d1e[k]) < 1e-12);
}

TEST_CASE("gauss-legendre integration") {
  CHECK(std::abs(integrate_gl([](double t) { return std::sin(t); }, 0.0, M_PI) - 2.0) < 1e-14);
  double ex = std::exp(3.0) - 1.0;
  CHECK(std::abs(integrate_gl([](double t) { return std::exp(t); }, 0.0, 3.0) - ex) < 1e-12);
  CHECK(std::abs(integrate_gl([](double t) { return std::exp(t); }, 3.0, 0.0) + ex) < 1e-12);
  CHECK(integrate_gl([](double t) { return t; }, 2.0, 2.0) == 0.0);
  double p38 = integrate_gl([](double t) { return std::pow(t, 38); }, -1.0, 1.0);
  CHECK(std::abs(p38 - 2.0 / 39.0) < 1e-15);
}

TEST_CASE("parallel for covers every index once") {
  std::vector<double> out(5000, 0.0);
  parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] += double(i);
  });
  for (std::size_t i = 0; i < out.size(); i += 997) CHECK(out[i] == double(i));
  CHECK(out[4999] == 4999.0);
}

TEST_CASE("expression parsing and evaluation") {
  CHECK(Expr::parse("2*t^2 + 1")(3.0) == doctest::Approx(19.0).epsilon(1e-15));
  CHECK(Expr::parse("t^2^3")(2.0) == doctest::Approx(256.0));
  CHECK(Expr::parse("-t^2")(3.0) == doctest::Approx(-9.0));
  CHECK(Expr::parse("cosh(0.5*t)")(1.2) == doctest::Approx(std::cosh(0.6)).epsilon(1e-15));
  CHECK(Expr::parse("sqrt(cosh(0.5*t))")(1.2) ==
        doctest::Approx(std::sqrt(std::cosh(0.6))).epsilon(1e-15));
  CHECK(Expr::parse("pi")(0.0) == doctest::Approx(M_PI));
  CHECK(Expr::parse("e^t")(1.0) == doctest::Approx(M_E * M_E / M_E));
  CHECK(Expr::parse("(1 + t) / (1 - t)")(0.5) == doctest::Approx(3.0));
  CHECK(Expr::parse("tanh(t) * sin(t) + abs(-t)")(0.7) ==
        doctest::Approx(std::tanh(0.7) * std::sin(0.7) + 0.7));
  CHECK(Expr::constant(2.5)(123.0) == 2.5);
  CHECK(Expr().empty());

  CHECK_THROWS_AS(Expr::parse("2*"), ConfigError);
  CHECK_THROWS_AS(Expr::parse("foo(t)"), ConfigError);
  CHECK_THROWS_AS(Expr::parse("(t"), ConfigError);
  CHECK_THROWS_AS(Expr::parse("t t"), ConfigError);
  CHECK_THROWS_AS(Expr()(1.0), ConfigError);
}

TEST_CASE("spectral derivative is exact for band-limited fields") {
  Grid g({AxisSpec{AxisKind::periodic, 32, 0.0, kTau}});
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(3.0 * g.coordinate(i, 0));
  auto d = g.d1(f, 0, DerivMode::spectral, FieldKind::geometry);
  auto dd = g.d2(f, 0, DerivMode::spectral, FieldKind::geometry);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coordinate(i, 0);
    e1 = std::max(e1, std::abs(d[i] - 3.0 * std::cos(3.0 * x)));
    e2 = std::max(e2, std::abs(dd[i] + 9.0 * std::sin(3.0 * x)));
  }
  CHECK(e1 < 1e-12);
  CHECK(e2 < 1e-11);
}

TEST_CASE("spectral derivative handles non-trigonometric periods") {
  Grid g({AxisSpec{AxisKind::periodic, 64, 0.0, 1.0}});
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(kTau * g.coordinate(i, 0));
  auto d = g.d1(f, 0, DerivMode::spectral, FieldKind::geometry);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(d[i] - kTau * std::cos(kTau * g.coordinate(i, 0))));
  CHECK(err < 1e-10);
}

namespace {

double wrap_fd4_err(int m, bool second) {
  Grid g({AxisSpec{AxisKind::periodic, m, 0.0, kTau}});
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(std::sin(g.coordinate(i, 0)));
  auto d = second ? g.d2(f, 0, DerivMode::fd4, FieldKind::geometry)
                  : g.d1(f, 0, DerivMode::fd4, FieldKind::geometry);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coordinate(i, 0);
    double c = std::cos(x), s = std::sin(x), ex = std::exp(s);
    double ref = second ? ex * (c * c - s) : ex * c;
    err = std::max(err, std::abs(d[i] - ref));
  }
  return err;
}

double interior_fd4_err(int m, bool second) {
  Grid g({AxisSpec{AxisKind::interior, m, 0.0, 1.0}});
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(2.0 * g.coordinate(i, 0));
  auto d = second ? g.d2(f, 0, DerivMode::fd4, FieldKind::geometry)
                  : g.d1(f, 0, DerivMode::fd4, FieldKind::geometry);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double ref = (second ? 4.0 : 2.0) * std::exp(2.0 * g.coordinate(i, 0));
    err = std::max(err, std::abs(d[i] - ref));
  }
  return err;
}

}  // namespace

TEST_CASE("wrap finite differences converge at fourth order") {
  double r1 = wrap_fd4_err(32, false) / wrap_fd4_err(64, false);
  double r2 = wrap_fd4_err(32, true) / wrap_fd4_err(64, true);
  CHECK(r1 > 12.0);
  CHECK(r1 < 22.0);
  CHECK(r2 > 12.0);
  CHECK(r2 < 22.0);
}

TEST_CASE("interior geometry derivatives keep fourth order at the edges") {
  CHECK(interior_fd4_err(64, false) < 1e-6);
  CHECK(interior_fd4_err(64, true) < 1e-4);
  double r1 = interior_fd4_err(32, false) / interior_fd4_err(64, false);
  double r2 = interior_fd4_err(32, true) / interior_fd4_err(64, true);
  CHECK(r1 > 12.0);
  CHECK(r2 > 12.0);
}

TEST_CASE("interior test fields use wrap-around stencils") {
  Grid g({AxisSpec{AxisKind::interior, 64, 0.0, 1.0}});
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(kTau * g.coordinate(i, 0));
  auto d = g.d1(f, 0, DerivMode::spectral, FieldKind::test);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(d[i] - kTau * std::cos(kTau * g.coordinate(i, 0))));
  CHECK(err < 1e-10);
}

TEST_CASE("polar weights integrate smooth functions against |sin| with the half fold") {
  Grid g({AxisSpec{AxisKind::polar, 32, 0.0, kTau}});
  auto quad = [&](const std::function<double(double)>& fn) {
    double s = 0.0;
    for (int k = 0; k < 32; ++k) {
      double x = g.nodes(0)(k);
      s += g.axis_weights(0)(k) * std::abs(std::sin(x)) * fn(x);
    }
    return s;
  };
  CHECK(std::abs(quad([](double) { return 1.0; }) - 2.0) < 1e-13);
  CHECK(std::abs(quad([](double x) { return std::cos(2.0 * x); }) + 2.0 / 3.0) < 1e-13);
  double s2 = quad([](double x) { return std::sin(x) * std::sin(x); });
  CHECK(std::abs(s2 - 4.0 / 3.0) < 1e-13);
}

TEST_CASE("sphere area from the double cover") {
  Grid g({AxisSpec{AxisKind::polar, 32, 0.0, kTau}, AxisSpec{AxisKind::periodic, 16, 0.0, kTau}});
  double area = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    area += g.weight(i) * std::abs(std::sin(g.coordinate(i, 0)));
  CHECK(std::abs(area - 4.0 * M_PI) < 1e-12);
}

TEST_CASE("node indexing round-trips") {
  Grid g({AxisSpec{AxisKind::periodic, 8, 0.0, 1.0}, AxisSpec{AxisKind::interior, 16, -1.0, 3.0},
          AxisSpec{AxisKind::periodic, 8, 0.0, kTau}});
  CHECK(g.size() == 8u * 16u * 8u);
  std::vector<int> mi;
  for (std::size_t i = 0; i < g.size(); i += 37) {
    g.multi_index(i, mi);
    CHECK(g.index(mi) == i);
    Eigen::VectorXd p = g.point(i);
    for (int a = 0; a < 3; ++a) {
      CHECK(p(a) == g.nodes(a)(mi[a]));
      CHECK(g.coordinate(i, a) == p(a));
    }
  }
  CHECK(g.wraps(0));
  CHECK(!g.wraps(1));
}

TEST_CASE("bad axis specifications are rejected") {
  CHECK_THROWS_AS(Grid({AxisSpec{AxisKind::periodic, 4, 0.0, 1.0}}), InvalidSpec);
  CHECK_THROWS_AS(Grid({AxisSpec{AxisKind::polar, 32, 0.0, M_PI}}), InvalidSpec);
  CHECK_THROWS_AS(Grid({AxisSpec{AxisKind::periodic, 8, 1.0, 1.0}}), InvalidSpec);
  CHECK_THROWS_AS(Grid(std::vector<AxisSpec>{}), InvalidSpec);

  Grid g({AxisSpec{AxisKind::periodic, 9, 0.0, 1.0}});
  std::vector<double> f(9, 0.0);
  CHECK_NOTHROW(g.d1(f, 0, DerivMode::fd4, FieldKind::geometry));
  CHECK_THROWS_AS(g.d1(f, 0, DerivMode::spectral, FieldKind::geometry), InvalidSpec);
  std::vector<double> wrong(5, 0.0);
  CHECK_THROWS_AS(g.d1(wrong, 0, DerivMode::fd4, FieldKind::geometry), InvalidSpec);
}
