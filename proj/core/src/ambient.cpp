#include "foliage/ambient.hpp"

#include <cmath>
#include <random>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"

namespace foliage {

namespace {

constexpr double kExprProbeStep = 1e-4;  // richardson step for warping rates

Eigen::MatrixXd ricci_of(const Tensor4& r) {
  const int d = r.dim();
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e)
      for (int a = 0; a < d; ++a) ric(b, e) += r(a, b, a, e);
  return ric;
}

double bianchi_of(const Tensor4& r) {
  const int d = r.dim();
  double worst = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          worst = std::max(worst, std::abs(r(a, b, c, e) + r(a, c, e, b) + r(a, e, b, c)));
  return worst;
}

void sample_positive(const Expr& f, double lo, double hi, const char* what) {
  for (int k = 0; k <= 128; ++k) {
    double t = lo + (hi - lo) * k / 128.0;
    double v = f(t);
    if (!std::isfinite(v) || v <= 0.0)
      throw InvalidSpec(std::string(what) + " must stay positive on the interval");
  }
}

void sample_finite(const Expr& f, double lo, double hi, const char* what) {
  for (int k = 0; k <= 64; ++k) {
    double t = lo + (hi - lo) * k / 64.0;
    if (!std::isfinite(f(t)))
      throw InvalidSpec(std::string(what) + " is not finite on the interval");
  }
}

}  // namespace

Tensor4 lower_riemann(const Eigen::MatrixXd& g, const Tensor4& mixed) {
  const int d = mixed.dim();
  Tensor4 low(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double s = 0.0;
          for (int m = 0; m < d; ++m) s += g(a, m) * mixed(m, b, c, e);
          low(a, b, c, e) = s;
        }
  return low;
}

AmbientChart::AmbientChart(std::string name, std::vector<DomainAxis> domain, MetricFn metric,
                           ChristoffelFn christoffel, RiemannFn riemann, FdSteps steps)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      metric_(std::move(metric)),
      christoffel_(std::move(christoffel)),
      riemann_(std::move(riemann)),
      steps_(steps) {
  if (domain_.empty()) throw InvalidSpec("chart needs at least one coordinate");
  if (!metric_) throw InvalidSpec("chart needs a metric");
  for (const DomainAxis& ax : domain_)
    if (!(ax.hi > ax.lo)) throw InvalidSpec("chart axis has an empty interval");
}

AmbientChart AmbientChart::finite_difference_twin(FdSteps steps) const {
  return AmbientChart(name_, domain_, metric_, nullptr, nullptr, steps);
}

void AmbientChart::check_inside(const Eigen::VectorXd& p, double margin_rel) const {
  if (p.size() != dim()) throw InvalidSpec("point dimension does not match chart");
  for (int a = 0; a < dim(); ++a) {
    const DomainAxis& ax = domain_[std::size_t(a)];
    if (ax.periodic) continue;
    double m = margin_rel * (ax.hi - ax.lo);
    if (p(a) < ax.lo + m || p(a) > ax.hi - m)
      throw OutsideDomain("point leaves the chart domain (or its stencil would)");
  }
}

Eigen::MatrixXd AmbientChart::metric(const Eigen::VectorXd& p) const {
  check_inside(p, 0.0);
  Eigen::MatrixXd g = metric_(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= kMetricEigenFloor)
    throw InvalidSpec("metric is not positive definite at a sampled point");
  return g;
}

Tensor3 AmbientChart::christoffels(const Eigen::VectorXd& p) const {
  if (christoffel_) {
    check_inside(p, 0.0);
    return christoffel_(p);
  }
  check_inside(p, 2.0 * steps_.metric_rel);
  const int d = dim();

  std::vector<Eigen::MatrixXd> dg(d);
  for (int b = 0; b < d; ++b) {
    double h = steps_.metric_rel * (domain_[std::size_t(b)].hi - domain_[std::size_t(b)].lo);
    auto at = [&](double off) {
      Eigen::VectorXd q = p;
      q(b) += off;
      return metric_(q);
    };
    dg[b] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
  }

  Eigen::MatrixXd ginv = metric(p).inverse();
  Tensor3 gamma(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = b; c < d; ++c) {
        double s = 0.0;
        for (int e = 0; e < d; ++e)
          s += ginv(a, e) * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
        gamma(a, b, c) = 0.5 * s;
        gamma(a, c, b) = 0.5 * s;
      }
  return gamma;
}

CurvatureTensorSample AmbientChart::riemann(const Eigen::VectorXd& p) const {
  CurvatureTensorSample out;
  out.point = p;
  const int d = dim();

  if (riemann_) {
    check_inside(p, 0.0);
    out.riemann = riemann_(p);
    out.ricci = ricci_of(out.riemann);
    return out;
  }

  double inner_margin = christoffel_ ? 0.0 : 2.0 * steps_.metric_rel;
  check_inside(p, 2.0 * steps_.christoffel_rel + inner_margin);

  Tensor3 gamma = christoffels(p);
  std::vector<Tensor3> dgamma;
  dgamma.reserve(d);
  for (int c = 0; c < d; ++c) {
    double h = steps_.christoffel_rel * (domain_[std::size_t(c)].hi - domain_[std::size_t(c)].lo);
    auto at = [&](double off) {
      Eigen::VectorXd q = p;
      q(c) += off;
      return christoffels(q);
    };
    Tensor3 g2 = at(2 * h), g1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    Tensor3 der(d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int e = 0; e < d; ++e)
          der(a, b, e) =
              (-g2(a, b, e) + 8 * g1(a, b, e) - 8 * m1(a, b, e) + m2(a, b, e)) / (12.0 * h);
    dgamma.push_back(std::move(der));
  }

  Tensor4 r(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double s = dgamma[std::size_t(c)](a, e, b) - dgamma[std::size_t(e)](a, c, b);
          for (int m = 0; m < d; ++m)
            s += gamma(a, c, m) * gamma(m, e, b) - gamma(a, e, m) * gamma(m, c, b);
          r(a, b, c, e) = s;
        }

  if (bianchi_of(r) > kBianchiTol)
    throw NumericalContractViolation("difference-mode curvature fails the first bianchi identity");

  out.riemann = std::move(r);
  out.ricci = ricci_of(out.riemann);
  return out;
}

LeafModel flat_leaf(std::vector<DomainAxis> domain) {
  LeafModel leaf;
  leaf.name = "flat";
  leaf.domain = std::move(domain);
  const int d = leaf.dim();
  leaf.metric = [d](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(d, d); };
  leaf.christoffel = [d](const Eigen::VectorXd&) { return Tensor3(d); };
  leaf.riemann = [d](const Eigen::VectorXd&) { return Tensor4(d); };
  return leaf;
}

LeafModel hyperbolic_halfspace_leaf(double beta, std::vector<DomainAxis> domain) {
  if (beta <= 0.0) throw InvalidSpec("hyperbolic leaf needs beta > 0");
  if (domain.empty() || domain.back().periodic || domain.back().lo <= 0.0)
    throw InvalidSpec("hyperbolic leaf needs a positive non-periodic depth axis");
  LeafModel leaf;
  leaf.name = "hyperbolic-halfspace";
  leaf.domain = std::move(domain);
  const int d = leaf.dim();
  const int yi = d - 1;
  const double c = -beta * beta;

  leaf.metric = [d, yi, beta](const Eigen::VectorXd& x) {
    double y = x(yi);
    return Eigen::MatrixXd((1.0 / (beta * beta * y * y)) * Eigen::MatrixXd::Identity(d, d));
  };
  leaf.christoffel = [d, yi](const Eigen::VectorXd& x) {
    double y = x(yi);
    Tensor3 gamma(d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int cc = 0; cc < d; ++cc) {
          double v = 0.0;
          if (a == b && cc == yi) v -= 1.0;
          if (a == cc && b == yi) v -= 1.0;
          if (b == cc && a == yi) v += 1.0;
          gamma(a, b, cc) = v / y;
        }
    return gamma;
  };
  leaf.riemann = [d, yi, beta, c](const Eigen::VectorXd& x) {
    double y = x(yi);
    double gs = 1.0 / (beta * beta * y * y);
    Tensor4 r(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            double v = 0.0;
            if (i == k && j == l) v += gs;
            if (i == l && j == k) v -= gs;
            r(i, j, k, l) = c * v;
          }
    return r;
  };
  return leaf;
}

AmbientChart make_euclidean(std::vector<DomainAxis> domain) {
  const int d = int(domain.size());
  return AmbientChart(
      "euclidean", std::move(domain),
      [d](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(d, d); },
      [d](const Eigen::VectorXd&) { return Tensor3(d); },
      [d](const Eigen::VectorXd&) { return Tensor4(d); });
}

namespace {

AmbientChart make_warped_diagonal(const WarpedSpec& spec) {
  const int n = int(spec.phi.size());
  if (n < 1) throw InvalidSpec("diagonal warping needs at least one rate");
  if (spec.leaf_domain.size() != std::size_t(n))
    throw InvalidSpec("diagonal warping: one domain axis per rate");
  for (const Expr& f : spec.phi) {
    if (f.empty()) throw InvalidSpec("diagonal warping rate is empty");
    sample_finite(f, spec.t_lo, spec.t_hi, "warping rate");
  }

  std::vector<DomainAxis> domain;
  domain.push_back(DomainAxis{spec.t_lo, spec.t_hi, false});
  for (const DomainAxis& ax : spec.leaf_domain) domain.push_back(ax);

  std::vector<Expr> phi = spec.phi;
  auto psi = [phi](int i, double t) {
    return -integrate_gl([&](double s) { return phi[std::size_t(i)](s); }, 0.0, t);
  };

  auto metric = [phi, psi, n](const Eigen::VectorXd& p) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n + 1, n + 1);
    for (int i = 0; i < n; ++i) g(i + 1, i + 1) = std::exp(2.0 * psi(i, p(0)));
    return g;
  };
  auto christoffel = [phi, psi, n](const Eigen::VectorXd& p) {
    double t = p(0);
    Tensor3 gamma(n + 1);
    for (int i = 0; i < n; ++i) {
      double f = phi[std::size_t(i)](t);
      gamma(0, i + 1, i + 1) = f * std::exp(2.0 * psi(i, t));
      gamma(i + 1, 0, i + 1) = -f;
      gamma(i + 1, i + 1, 0) = -f;
    }
    return gamma;
  };
  auto riemann = [phi, psi, n](const Eigen::VectorXd& p) {
    double t = p(0);
    Eigen::VectorXd f(n), df(n), gd(n + 1);
    gd(0) = 1.0;
    for (int i = 0; i < n; ++i) {
      f(i) = phi[std::size_t(i)](t);
      df(i) = richardson_d1([&](double s) { return phi[std::size_t(i)](s); }, t, kExprProbeStep);
      gd(i + 1) = std::exp(2.0 * psi(i, t));
    }
    auto k_pair = [&](int a, int b) {
      if (a == 0) return df(b - 1) - f(b - 1) * f(b - 1);
      if (b == 0) return df(a - 1) - f(a - 1) * f(a - 1);
      return -f(a - 1) * f(b - 1);
    };
    Tensor4 r(n + 1);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) {
        if (a == b) continue;
        double k = k_pair(a, b);
        r(a, b, a, b) = k * gd(b);
        r(a, b, b, a) = -k * gd(b);
      }
    return r;
  };

  return AmbientChart("warped-diagonal", std::move(domain), metric, christoffel, riemann);
}

AmbientChart make_warped_isotropic(const WarpedSpec& spec) {
  if (spec.w.empty()) throw InvalidSpec("isotropic warping needs a factor");
  if (!spec.leaf.metric || !spec.leaf.christoffel || !spec.leaf.riemann)
    throw InvalidSpec("isotropic warping needs a complete leaf model");
  sample_positive(spec.w, spec.t_lo, spec.t_hi, "warping factor");

  const int dl = spec.leaf.dim();
  std::vector<DomainAxis> domain;
  domain.push_back(DomainAxis{spec.t_lo, spec.t_hi, false});
  for (const DomainAxis& ax : spec.leaf.domain) domain.push_back(ax);

  Expr w = spec.w;
  LeafModel leaf = spec.leaf;

  auto metric = [w, leaf, dl](const Eigen::VectorXd& p) {
    double wt = w(p(0));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dl + 1, dl + 1);
    g(0, 0) = 1.0;
    g.bottomRightCorner(dl, dl) = wt * wt * leaf.metric(p.tail(dl));
    return g;
  };
  auto christoffel = [w, leaf, dl](const Eigen::VectorXd& p) {
    double t = p(0);
    double wt = w(t);
    double dw = richardson_d1([&](double s) { return w(s); }, t, kExprProbeStep);
    Eigen::VectorXd x = p.tail(dl);
    Eigen::MatrixXd gl = leaf.metric(x);
    Tensor3 gl3 = leaf.christoffel(x);
    Tensor3 gamma(dl + 1);
    for (int i = 0; i < dl; ++i)
      for (int j = 0; j < dl; ++j) {
        gamma(0, i + 1, j + 1) = -wt * dw * gl(i, j);
        for (int k = 0; k < dl; ++k) gamma(i + 1, j + 1, k + 1) = gl3(i, j, k);
      }
    for (int i = 0; i < dl; ++i) {
      gamma(i + 1, 0, i + 1) = dw / wt;
      gamma(i + 1, i + 1, 0) = dw / wt;
    }
    return gamma;
  };
  auto riemann = [w, leaf, dl](const Eigen::VectorXd& p) {
    double t = p(0);
    double wt = w(t);
    double dw = richardson_d1([&](double s) { return w(s); }, t, kExprProbeStep);
    double ddw = richardson_d2([&](double s) { return w(s); }, t, kExprProbeStep * 10.0);
    Eigen::VectorXd x = p.tail(dl);
    Eigen::MatrixXd gl = leaf.metric(x);
    Tensor4 rl = leaf.riemann(x);
    Tensor4 r(dl + 1);
    for (int i = 0; i < dl; ++i)
      for (int j = 0; j < dl; ++j) {
        for (int k = 0; k < dl; ++k)
          for (int l = 0; l < dl; ++l) {
            double v = rl(i, j, k, l);
            if (i == k) v -= dw * dw * gl(l, j);
            if (i == l) v += dw * dw * gl(k, j);
            r(i + 1, j + 1, k + 1, l + 1) = v;
          }
        r(0, i + 1, 0, j + 1) = -wt * ddw * gl(i, j);
        r(0, i + 1, j + 1, 0) = wt * ddw * gl(i, j);
      }
    for (int j = 0; j < dl; ++j) {
      r(j + 1, 0, 0, j + 1) = ddw / wt;
      r(j + 1, 0, j + 1, 0) = -ddw / wt;
    }
    return r;
  };

  return AmbientChart("warped-isotropic", std::move(domain), metric, christoffel, riemann);
}

}  // namespace

AmbientChart make_warped(const WarpedSpec& spec) {
  if (!(spec.t_hi > spec.t_lo)) throw InvalidSpec("warping needs a nonempty t interval");
  return spec.kind == WarpedSpec::Kind::diagonal ? make_warped_diagonal(spec)
                                                 : make_warped_isotropic(spec);
}

AmbientChart make_product_halfplanes(double beta1, double beta2,
                                     std::vector<DomainAxis> domain) {
  if (beta1 <= 0.0 || beta2 <= 0.0) throw InvalidSpec("half-plane product needs positive betas");
  if (domain.size() != 4) throw InvalidSpec("half-plane product is four-dimensional");
  for (int yi : {1, 3})
    if (domain[std::size_t(yi)].periodic || domain[std::size_t(yi)].lo <= 0.0)
      throw InvalidSpec("half-plane depth axes must be positive and non-periodic");

  const double b[2] = {beta1, beta2};
  auto scale = [b](const Eigen::VectorXd& p, int block) {
    double y = p(2 * block + 1);
    return 1.0 / (b[block] * b[block] * y * y);
  };

  auto metric = [scale](const Eigen::VectorXd& p) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    for (int block = 0; block < 2; ++block) {
      double s = scale(p, block);
      g(2 * block, 2 * block) = s;
      g(2 * block + 1, 2 * block + 1) = s;
    }
    return g;
  };
  auto christoffel = [](const Eigen::VectorXd& p) {
    Tensor3 gamma(4);
    for (int block = 0; block < 2; ++block) {
      int x = 2 * block, y = 2 * block + 1;
      double inv = 1.0 / p(y);
      gamma(x, x, y) = -inv;
      gamma(x, y, x) = -inv;
      gamma(y, x, x) = inv;
      gamma(y, y, y) = -inv;
    }
    return gamma;
  };
  auto riemann = [scale, b](const Eigen::VectorXd& p) {
    Tensor4 r(4);
    for (int block = 0; block < 2; ++block) {
      double c = -b[block] * b[block];
      double s = scale(p, block);
      int o = 2 * block;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) {
              double v = 0.0;
              if (i == k && j == l) v += s;
              if (i == l && j == k) v -= s;
              r(o + i, o + j, o + k, o + l) = c * v;
            }
    }
    return r;
  };

  return AmbientChart("product-halfplanes", std::move(domain), metric, christoffel, riemann);
}

Classification classify(const AmbientChart& chart, const std::vector<Eigen::VectorXd>& samples) {
  if (samples.size() < 10) throw InvalidSpec("classification needs at least 10 samples");
  const int d = chart.dim();

  std::vector<Tensor4> lows;
  std::vector<Eigen::MatrixXd> metrics, riccis;
  lows.reserve(samples.size());
  double rg = 0.0, gg = 0.0, rig = 0.0, gg2 = 0.0, rmax = 0.0, ricmax = 0.0;

  for (const Eigen::VectorXd& p : samples) {
    Eigen::MatrixXd g = chart.metric(p);
    CurvatureTensorSample s = chart.riemann(p);
    Tensor4 low = lower_riemann(g, s.riemann);
    for (int a = 0; a < d; ++a)
      for (int bb = 0; bb < d; ++bb)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            double gq = g(a, c) * g(bb, e) - g(a, e) * g(c, bb);
            rg += low(a, bb, c, e) * gq;
            gg += gq * gq;
            rmax = std::max(rmax, std::abs(low(a, bb, c, e)));
          }
    rig += (s.ricci.array() * g.array()).sum();
    gg2 += (g.array() * g.array()).sum();
    ricmax = std::max(ricmax, s.ricci.cwiseAbs().maxCoeff());
    lows.push_back(std::move(low));
    metrics.push_back(std::move(g));
    riccis.push_back(std::move(s.ricci));
  }

  Classification out;
  out.c = rg / gg;
  out.lambda = rig / gg2;

  double sf = 0.0, ei = 0.0;
  for (std::size_t q = 0; q < samples.size(); ++q) {
    const Eigen::MatrixXd& g = metrics[q];
    for (int a = 0; a < d; ++a)
      for (int bb = 0; bb < d; ++bb)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            double gq = g(a, c) * g(bb, e) - g(a, e) * g(c, bb);
            sf = std::max(sf, std::abs(lows[q](a, bb, c, e) - out.c * gq));
          }
    ei = std::max(ei, (riccis[q] - out.lambda * g).cwiseAbs().maxCoeff());
  }
  out.space_form_residual = sf / (1.0 + rmax);
  out.einstein_residual = ei / (1.0 + ricmax);

  if (out.space_form_residual < kClassifyTol)
    out.kind = Classification::Kind::space_form;
  else if (out.einstein_residual < kClassifyTol)
    out.kind = Classification::Kind::einstein;
  else
    out.kind = Classification::Kind::generic;
  return out;
}

std::vector<Eigen::VectorXd> chart_samples(const AmbientChart& chart, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd p(chart.dim());
    for (int a = 0; a < chart.dim(); ++a) {
      const DomainAxis& ax = chart.domain()[std::size_t(a)];
      double span = ax.hi - ax.lo;
      p(a) = ax.periodic ? ax.lo + span * u(rng) : ax.lo + span * (0.1 + 0.8 * u(rng));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace foliage

