#include "foliage/leafcalc.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"
#include "node_loops.hpp"

namespace foliage {
namespace {

using detail::for_nodes;

std::vector<double> to_samples(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_samples(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size()));
}

void require_same_leaf(const LeafPatch* leaf, const ScalarField& f, const char* role) {
  if (!f.leaf || f.leaf != leaf)
    throw MismatchedLeaf(std::string(role) + " was sampled on a different leaf");
}

// first derivatives of the samples along every axis, as grid fields
std::vector<std::vector<double>> axis_derivatives(const LeafPatch& leaf,
                                                  const std::vector<double>& fv,
                                                  FieldKind kind) {
  std::vector<std::vector<double>> d(std::size_t(leaf.n));
  for (int ax = 0; ax < leaf.n; ++ax)
    d[std::size_t(ax)] = leaf.grid.d1(fv, ax, leaf.mode, kind);
  return d;
}

// contravariant gradient rows: g^{-1} df per node
Eigen::MatrixXd raised_gradient(const LeafPatch& leaf,
                                const std::vector<std::vector<double>>& df) {
  const int n = leaf.n;
  Eigen::MatrixXd up(long(leaf.size()), n);
  for_nodes(leaf.size(), [&](std::size_t i) {
    Eigen::VectorXd low(n);
    for (int ax = 0; ax < n; ++ax) low(ax) = df[std::size_t(ax)][i];
    const auto& l = leaf.chol[i];
    Eigen::VectorXd y = l.template triangularView<Eigen::Lower>().solve(low);
    up.row(long(i)) =
        l.transpose().template triangularView<Eigen::Upper>().solve(y).transpose();
  });
  return up;
}

// divergence of the transformation, one covector row per node
Eigen::MatrixXd newton_divergence(const OperatorContext& ctx) {
  const LeafPatch& leaf = *ctx.leaf;
  const int n = leaf.n;
  const std::size_t count = leaf.size();

  // d_i T^i_j, each component along its own upper axis only: rows of T with a
  // polar upper index blow up toward the poles, but stay smooth along their
  // own coordinate lines
  std::vector<std::vector<double>> dt(std::size_t(n) * std::size_t(n));
  {
    std::vector<double> comp(count);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < count; ++k) comp[k] = ctx.fields.newton[k](i, j);
        dt[std::size_t(i) * n + j] = leaf.grid.d1(comp, i, leaf.mode, FieldKind::geometry);
      }
  }

  Eigen::MatrixXd div = Eigen::MatrixXd::Zero(long(count), n);
  for_nodes(count, [&](std::size_t node) {
    const auto& gamma = leaf.christoffels_leaf[node];
    const auto& t = ctx.fields.newton[node];
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += dt[std::size_t(i) * n + j][node];
        for (int m = 0; m < n; ++m)
          acc += gamma(i, i, m) * t(m, j) - gamma(m, i, j) * t(i, m);
      }
      div(long(node), j) = acc;
    }
  });
  return div;
}

ScalarField trace_form(const OperatorContext& ctx, const ScalarField& f) {
  auto hess = covariant_hessian(f);
  ScalarField out{ctx.leaf, Eigen::VectorXd(long(ctx.leaf->size())), f.kind};
  for_nodes(ctx.leaf->size(), [&](std::size_t i) {
    out.values(long(i)) = (ctx.fields.newton[i] * hess[i]).trace();
  });
  return out;
}

ScalarField divergence_form(const OperatorContext& ctx, const ScalarField& f) {
  const LeafPatch& leaf = *ctx.leaf;
  const int n = leaf.n;
  const std::size_t count = leaf.size();

  auto df = axis_derivatives(leaf, to_samples(f.values), f.kind);
  Eigen::MatrixXd up = raised_gradient(leaf, df);

  // flux components V^i = T^i_j (grad f)^j
  Eigen::MatrixXd flux(long(count), n);
  for_nodes(count, [&](std::size_t i) {
    flux.row(long(i)) = (ctx.fields.newton[i] * up.row(long(i)).transpose()).transpose();
  });

  // each V^i differentiated along axis i only, same reason as in the
  // transformation divergence
  std::vector<std::vector<double>> dflux;
  dflux.resize(std::size_t(n));
  {
    std::vector<double> comp(count);
    for (int i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < count; ++k) comp[k] = flux(long(k), i);
      dflux[std::size_t(i)] = leaf.grid.d1(comp, i, leaf.mode, f.kind);
    }
  }

  Eigen::MatrixXd tdiv = newton_divergence(ctx);

  ScalarField out{ctx.leaf, Eigen::VectorXd(long(count)), f.kind};
  for_nodes(count, [&](std::size_t node) {
    const auto& gamma = leaf.christoffels_leaf[node];
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += dflux[std::size_t(i)][node];
      for (int m = 0; m < n; ++m) acc += gamma(i, i, m) * flux(long(node), m);
    }
    acc -= tdiv.row(long(node)).dot(up.row(long(node)));
    out.values(long(node)) = acc;
  });
  return out;
}

}  // namespace

ScalarField make_field(const LeafPatch& leaf,
                       const std::function<double(const Eigen::VectorXd&)>& fn,
                       FieldKind kind) {
  if (!fn) throw InvalidSpec("field needs a sampling function");
  Eigen::VectorXd values(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t i) { values(long(i)) = fn(leaf.grid.point(i)); });
  return make_field(leaf, std::move(values), kind);
}

ScalarField make_field(const LeafPatch& leaf, Eigen::VectorXd values, FieldKind kind) {
  if (values.size() != long(leaf.size()))
    throw InvalidSpec("field sample count does not match the leaf grid");
  if (!values.allFinite()) throw InvalidSpec("field samples must be finite");
  return ScalarField{&leaf, std::move(values), kind};
}

Eigen::MatrixXd gradient(const ScalarField& f) {
  if (!f.leaf) throw InvalidSpec("field is not bound to a leaf");
  const LeafPatch& leaf = *f.leaf;
  auto df = axis_derivatives(leaf, to_samples(f.values), f.kind);
  Eigen::MatrixXd out(long(leaf.size()), leaf.n);
  for (int ax = 0; ax < leaf.n; ++ax)
    out.col(ax) = from_samples(df[std::size_t(ax)]);
  return out;
}

std::vector<Eigen::MatrixXd> covariant_hessian(const ScalarField& f) {
  if (!f.leaf) throw InvalidSpec("field is not bound to a leaf");
  const LeafPatch& leaf = *f.leaf;
  const int n = leaf.n;
  const std::size_t count = leaf.size();

  auto fv = to_samples(f.values);
  auto df = axis_derivatives(leaf, fv, f.kind);

  // plain second partials; cross terms reuse the first-derivative fields
  std::vector<std::vector<double>> dd(std::size_t(n) * std::size_t(n));
  for (int i = 0; i < n; ++i) {
    dd[std::size_t(i) * n + i] = leaf.grid.d2(fv, i, leaf.mode, f.kind);
    for (int j = i + 1; j < n; ++j)
      dd[std::size_t(i) * n + j] =
          leaf.grid.d1(df[std::size_t(i)], j, leaf.mode, f.kind);
  }

  std::vector<Eigen::MatrixXd> hess(count);
  for_nodes(count, [&](std::size_t node) {
    const auto& gamma = leaf.christoffels_leaf[node];
    Eigen::MatrixXd low(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = dd[std::size_t(i) * n + j][node];
        for (int k = 0; k < n; ++k) v -= gamma(k, i, j) * df[std::size_t(k)][node];
        low(i, j) = v;
        low(j, i) = v;
      }
    const auto& l = leaf.chol[node];
    Eigen::MatrixXd y = l.template triangularView<Eigen::Lower>().solve(low);
    hess[node] = l.transpose().template triangularView<Eigen::Upper>().solve(y);
  });
  return hess;
}

double integrate(const ScalarField& f) {
  if (!f.leaf) throw InvalidSpec("field is not bound to a leaf");
  Eigen::VectorXd terms = f.leaf->volume_weights.cwiseProduct(f.values);
  return pairwise_sum(terms.data(), std::size_t(terms.size()));
}

double integrate_squared(const ScalarField& f) {
  if (!f.leaf) throw InvalidSpec("field is not bound to a leaf");
  Eigen::VectorXd terms =
      f.leaf->volume_weights.cwiseProduct(f.values.cwiseProduct(f.values));
  return pairwise_sum(terms.data(), std::size_t(terms.size()));
}

OperatorContext make_context(const AmbientChart& chart, const LeafPatch& leaf, int r,
                             unsigned classify_seed) {
  OperatorContext ctx;
  ctx.chart = &chart;
  ctx.leaf = &leaf;
  ctx.r = r;
  ctx.fields = curvature_fields(leaf, r);

  const int n = leaf.n;
  const std::size_t count = leaf.size();
  ctx.a2t.resize(long(count));
  ctx.rbar.resize(long(count));

  for_nodes(count, [&](std::size_t node) {
    double a2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double k = leaf.kappa(long(node), i);
      a2 += k * k * ctx.fields.mu(long(node), i);
    }
    ctx.a2t(long(node)) = a2;

    Eigen::VectorXd p = leaf.points.row(long(node));
    Eigen::MatrixXd gbar = chart.metric(p);
    Tensor4 rlow = lower_riemann(gbar, chart.riemann(p).riemann);
    Eigen::VectorXd nvec = leaf.normal.row(long(node));

    const int m = leaf.ambient_dim;
    Eigen::MatrixXd paired = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) {
        double acc = 0.0;
        for (int b = 0; b < m; ++b)
          for (int d = 0; d < m; ++d) acc += rlow(a, b, c, d) * nvec(b) * nvec(d);
        paired(a, c) = acc;
      }

    Eigen::MatrixXd frame = orthonormal_tangent_frame(leaf, node);
    Eigen::MatrixXd curv = frame.transpose() * paired * frame;
    ctx.rbar(long(node)) = (ctx.fields.newton_sym[node] * curv).trace();
  });

  ctx.ambient_class = classify(chart, chart_samples(chart, 12, classify_seed));

  if (ctx.ambient_class.kind == Classification::Kind::space_form) {
    const double c = ctx.ambient_class.c;
    for (std::size_t node = 0; node < count; ++node) {
      double target = double(n - r) * c * ctx.fields.s_r(long(node));
      if (std::abs(ctx.rbar(long(node)) - target) >
          kSpaceFormTermRel * (1.0 + std::abs(target)))
        throw NumericalContractViolation(
            "ambient curvature term drifted from its constant-curvature value");
    }
  }
  return ctx;
}

ScalarField l_r(const OperatorContext& ctx, const ScalarField& f, OperatorForm form) {
  require_same_leaf(ctx.leaf, f, "operator argument");
  return form == OperatorForm::trace ? trace_form(ctx, f) : divergence_form(ctx, f);
}

ScalarField j_r(const OperatorContext& ctx, const ScalarField& f, OperatorForm form) {
  ScalarField out = l_r(ctx, f, form);
  out.values += (ctx.a2t + ctx.rbar).cwiseProduct(f.values);
  return out;
}

double i_r(const OperatorContext& ctx, const ScalarField& f, const ScalarField& g) {
  require_same_leaf(ctx.leaf, f, "first argument");
  require_same_leaf(ctx.leaf, g, "second argument");
  ScalarField jg = j_r(ctx, g);
  Eigen::VectorXd terms =
      ctx.leaf->volume_weights.cwiseProduct(f.values.cwiseProduct(jg.values));
  return -pairwise_sum(terms.data(), std::size_t(terms.size()));
}

double newton_dirichlet(const OperatorContext& ctx, const ScalarField& f,
                        const ScalarField& g) {
  require_same_leaf(ctx.leaf, f, "first argument");
  require_same_leaf(ctx.leaf, g, "second argument");
  const LeafPatch& leaf = *ctx.leaf;
  const int n = leaf.n;

  auto df = axis_derivatives(leaf, to_samples(f.values), f.kind);
  auto dg = axis_derivatives(leaf, to_samples(g.values), g.kind);

  Eigen::VectorXd terms(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t node) {
    Eigen::VectorXd lf(n), lg(n);
    for (int ax = 0; ax < n; ++ax) {
      lf(ax) = df[std::size_t(ax)][node];
      lg(ax) = dg[std::size_t(ax)][node];
    }
    const auto& l = leaf.chol[node];
    Eigen::VectorXd yf = l.template triangularView<Eigen::Lower>().solve(lf);
    Eigen::VectorXd yg = l.template triangularView<Eigen::Lower>().solve(lg);
    terms(long(node)) =
        leaf.volume_weights(long(node)) * yf.dot(ctx.fields.newton_sym[node] * yg);
  });
  return pairwise_sum(terms.data(), std::size_t(terms.size()));
}

DivergenceResiduals divergence_residuals(const OperatorContext& ctx, const ScalarField& f) {
  require_same_leaf(ctx.leaf, f, "operator argument");
  const auto kind = ctx.ambient_class.kind;
  const bool ok = ctx.r == 0 ||
                  (ctx.r == 1 && kind != Classification::Kind::generic) ||
                  (ctx.r >= 2 && kind == Classification::Kind::space_form);
  if (!ok)
    throw CaseNotApplicable(
        "transformation divergence is not controlled by this ambient class");

  ScalarField lf = l_r(ctx, f);
  Eigen::VectorXd w = ctx.leaf->volume_weights;

  Eigen::VectorXd t1 = w.cwiseProduct(lf.values);
  DivergenceResiduals res;
  res.conservation = std::abs(pairwise_sum(t1.data(), std::size_t(t1.size())));

  Eigen::VectorXd t2 = w.cwiseProduct(f.values.cwiseProduct(lf.values));
  res.parts = std::abs(pairwise_sum(t2.data(), std::size_t(t2.size())) +
                       newton_dirichlet(ctx, f, f));
  return res;
}

}  // namespace foliage
