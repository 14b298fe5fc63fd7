#include "foliage/varfields.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>
#include <utility>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"
#include "node_loops.hpp"

namespace foliage {
namespace {

using detail::for_nodes;

// partials of the field components, d(a, b) = d_a U^b, by a fourth-order
// stencil scaled to each axis span
Eigen::MatrixXd field_partials(const AmbientVectorField& u, const Eigen::VectorXd& p,
                               const std::vector<DomainAxis>& domain) {
  const int m = int(p.size());
  Eigen::MatrixXd d(m, m);
  for (int a = 0; a < m; ++a) {
    const double h = kFieldProbeRel * (domain[std::size_t(a)].hi - domain[std::size_t(a)].lo);
    auto at = [&](double off) {
      Eigen::VectorXd q = p;
      q(a) += off;
      return u.value(q);
    };
    d.row(a) =
        ((at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)).transpose();
  }
  return d;
}

// covariant derivative matrix, cov(a, b) = nabla_a U^b
Eigen::MatrixXd covariant_partials(const AmbientChart& chart, const AmbientVectorField& u,
                                   const Eigen::VectorXd& p) {
  const int m = chart.dim();
  Eigen::VectorXd val = u.value(p);
  Eigen::MatrixXd cov = field_partials(u, p, chart.domain());
  Tensor3 gamma = chart.christoffels(p);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) acc += gamma(b, a, c) * val(c);
      cov(a, b) += acc;
    }
  return cov;
}

// half the divergence-trace: the conformal factor of a conformal field
double conformal_k(const AmbientChart& chart, const AmbientVectorField& u,
                   const Eigen::VectorXd& p) {
  return covariant_partials(chart, u, p).trace() / chart.dim();
}

int parse_index(const std::string& text) {
  if (text.empty()) throw ConfigError("missing axis index in field name");
  for (char ch : text)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw ConfigError("axis index must be a non-negative integer: " + text);
  return std::stoi(text);
}

}  // namespace

AmbientVectorField translation_field(int axis, int dim) {
  if (axis < 0 || axis >= dim) throw ConfigError("translation axis out of range");
  AmbientVectorField f;
  f.name = "translation(" + std::to_string(axis) + ")";
  f.declared = FlowKind::killing;
  f.value = [axis, dim](const Eigen::VectorXd&) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(axis) = 1.0;
    return v;
  };
  return f;
}

AmbientVectorField rotation_field(int i, int j, int dim) {
  if (i < 0 || j < 0 || i >= dim || j >= dim || i == j)
    throw ConfigError("rotation plane needs two distinct axes inside the chart");
  AmbientVectorField f;
  f.name = "rotation(" + std::to_string(i) + "," + std::to_string(j) + ")";
  f.declared = FlowKind::killing;
  f.value = [i, j, dim](const Eigen::VectorXd& p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(i) = -p(j);
    v(j) = p(i);
    return v;
  };
  return f;
}

AmbientVectorField position_field(int dim) {
  if (dim <= 0) throw ConfigError("position field needs a positive dimension");
  AmbientVectorField f;
  f.name = "position";
  f.declared = FlowKind::conformal;
  f.value = [](const Eigen::VectorXd& p) { return p; };
  return f;
}

AmbientVectorField warped_normal_field(const Expr& profile, int dim) {
  if (profile.empty()) throw ConfigError("warped-normal needs a profile expression");
  if (dim <= 0) throw ConfigError("warped-normal needs a positive dimension");
  AmbientVectorField f;
  f.name = "warped-normal(" + profile.source() + ")";
  f.value = [profile, dim](const Eigen::VectorXd& p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(0) = profile(p(0));
    return v;
  };
  return f;
}

AmbientVectorField parse_field(const std::string& source, int dim) {
  if (source == "position") return position_field(dim);
  auto open = source.find('(');
  auto close = source.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close != source.size() - 1 ||
      close <= open)
    throw ConfigError("unrecognized field name: " + source);
  const std::string head = source.substr(0, open);
  const std::string args = source.substr(open + 1, close - open - 1);
  if (head == "translation") return translation_field(parse_index(args), dim);
  if (head == "rotation") {
    auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("rotation needs two axes: " + source);
    return rotation_field(parse_index(args.substr(0, comma)),
                          parse_index(args.substr(comma + 1)), dim);
  }
  if (head == "warped-normal") return warped_normal_field(Expr::parse(args), dim);
  throw ConfigError("unrecognized field name: " + source);
}

ConformalReport conformal_factor(const AmbientChart& chart, const AmbientVectorField& u,
                                 const std::vector<Eigen::VectorXd>& samples) {
  if (!u.value) throw InvalidSpec("field needs a value callable");
  if (samples.size() < 10)
    throw InvalidSpec("conformal classification needs at least ten samples");

  const int m = chart.dim();
  ConformalReport report;
  report.k.resize(long(samples.size()));
  Eigen::VectorXd dev(long(samples.size()));

  for_nodes(samples.size(), [&](std::size_t s) {
    const Eigen::VectorXd& p = samples[s];
    Eigen::MatrixXd g = chart.metric(p);
    Eigen::MatrixXd cov = covariant_partials(chart, u, p);
    double k = cov.trace() / m;

    Eigen::MatrixXd lie(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double acc = 0.0;
        for (int c = 0; c < m; ++c) acc += g(c, b) * cov(a, c) + g(c, a) * cov(b, c);
        lie(a, b) = acc;
      }
    report.k(long(s)) = k;
    dev(long(s)) = (lie - 2.0 * k * g).cwiseAbs().maxCoeff();
  });

  report.max_deviation = dev.maxCoeff();
  if (report.max_deviation < kConformalResidualTol)
    report.verdict = report.k.cwiseAbs().maxCoeff() < kKillingFactorTol ? FlowKind::killing
                                                                        : FlowKind::conformal;
  else
    report.verdict = FlowKind::generic;
  return report;
}

ScalarField normal_component(const AmbientChart& chart, const LeafPatch& leaf,
                             const AmbientVectorField& u) {
  if (!u.value) throw InvalidSpec("field needs a value callable");
  Eigen::VectorXd values(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t node) {
    Eigen::VectorXd p = leaf.points.row(long(node));
    values(long(node)) =
        leaf.normal.row(long(node)) * chart.metric(p) * u.value(p);
  });
  return make_field(leaf, std::move(values), FieldKind::geometry);
}

double gradient_formula_residual(const AmbientChart& chart, const LeafPatch& leaf,
                                 const AmbientVectorField& u) {
  ScalarField f = normal_component(chart, leaf, u);
  Eigen::MatrixXd df = gradient(f);

  Eigen::VectorXd res(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t node) {
    Eigen::VectorXd p = leaf.points.row(long(node));
    Eigen::MatrixXd g = chart.metric(p);
    Eigen::VectorXd val = u.value(p);
    Eigen::MatrixXd cov = covariant_partials(chart, u, p);
    Eigen::VectorXd nvec = leaf.normal.row(long(node));

    // ambient derivative of U along N, contravariant
    Eigen::VectorXd rate = cov.transpose() * nvec;

    Eigen::MatrixXd frame = orthonormal_tangent_frame(leaf, node);
    Eigen::VectorXd y = leaf.chol[node]
                            .triangularView<Eigen::Lower>()
                            .solve(df.row(long(node)).transpose());
    Eigen::VectorXd rate_t = frame.transpose() * g * rate;
    Eigen::VectorXd u_t = frame.transpose() * g * val;
    res(long(node)) = (y + rate_t + leaf.shape_sym[node] * u_t).norm();
  });
  return res.maxCoeff();
}

double residual_scale(const OperatorContext& ctx, const AmbientVectorField& u) {
  const LeafPatch& leaf = *ctx.leaf;
  double amax = leaf.kappa.cwiseAbs().maxCoeff();
  Eigen::VectorXd unorm(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t node) {
    Eigen::VectorXd p = leaf.points.row(long(node));
    Eigen::VectorXd val = u.value(p);
    unorm(long(node)) = std::sqrt(val.dot(ctx.chart->metric(p) * val));
  });
  return std::max(1.0, std::pow(amax, ctx.r + 2) * unorm.maxCoeff());
}

double conformal_flow_residual(const OperatorContext& ctx, const AmbientVectorField& u) {
  const AmbientChart& chart = *ctx.chart;
  const LeafPatch& leaf = *ctx.leaf;

  ConformalReport report = conformal_factor(chart, u, chart_samples(chart, 12, 7));
  if (report.verdict == FlowKind::generic)
    throw NotConformal("field " + u.name + " is neither killing nor conformal");

  ScalarField f = normal_component(chart, leaf, u);
  ScalarField jf = j_r(ctx, f);

  // leaf gradient of S_{r+1}
  std::vector<double> sn(leaf.size());
  for (std::size_t i = 0; i < leaf.size(); ++i) sn[i] = ctx.fields.s_next(long(i));
  std::vector<std::vector<double>> dsn(std::size_t(leaf.n));
  for (int ax = 0; ax < leaf.n; ++ax)
    dsn[std::size_t(ax)] = leaf.grid.d1(sn, ax, leaf.mode, FieldKind::geometry);

  const double h = kNormalFactorStep;
  Eigen::VectorXd res(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t node) {
    Eigen::VectorXd p = leaf.points.row(long(node));
    Eigen::VectorXd nvec = leaf.normal.row(long(node));
    Eigen::MatrixXd g = chart.metric(p);
    Eigen::MatrixXd frame = orthonormal_tangent_frame(leaf, node);

    Eigen::VectorXd dsl(leaf.n);
    for (int ax = 0; ax < leaf.n; ++ax) dsl(ax) = dsn[std::size_t(ax)][node];
    Eigen::VectorXd ys =
        leaf.chol[node].triangularView<Eigen::Lower>().solve(dsl);
    Eigen::VectorXd u_t = frame.transpose() * g * u.value(p);

    double k = conformal_k(chart, u, p);
    double nk =
        (conformal_k(chart, u, p + h * nvec) - conformal_k(chart, u, p - h * nvec)) /
        (2.0 * h);

    double rhs = -u_t.dot(ys) - (ctx.r + 1) * k * ctx.fields.s_next(long(node)) -
                 nk * double(leaf.n - ctx.r) * ctx.fields.s_r(long(node));
    res(long(node)) = std::abs(jf.values(long(node)) - rhs);
  });
  return res.maxCoeff();
}

JacobiReport jacobi_check(const OperatorContext& ctx, const AmbientVectorField& u) {
  if (!ctx.fields.tense)
    throw PreconditionFailed("S_{r+1} is not constant on this leaf");
  ConformalReport report =
      conformal_factor(*ctx.chart, u, chart_samples(*ctx.chart, 12, 7));
  if (report.verdict != FlowKind::killing)
    throw NotConformal("field " + u.name + " is not killing on this chart");

  ScalarField f = normal_component(*ctx.chart, *ctx.leaf, u);
  ScalarField jf = j_r(ctx, f);
  JacobiReport out;
  out.residual = jf.values.cwiseAbs().maxCoeff();
  out.scale = residual_scale(ctx, u);
  out.is_jacobi = out.residual < kVariationResidualRel * out.scale;
  return out;
}

PreservationReport foliation_preserving_residual(const OperatorContext& ctx,
                                                 const FoliationSlice& slice,
                                                 const AmbientVectorField& v) {
  if (ctx.leaf != &slice.leaf)
    throw InvalidSpec("operator context is bound to a different leaf");
  if (ctx.r != slice.r)
    throw InvalidSpec("operator context and slice disagree on the order r");

  const double drift = slice.ds_next.cwiseAbs().maxCoeff();
  const double level = ctx.fields.s_next.cwiseAbs().maxCoeff();
  if (!ctx.fields.tense || drift > kEquicurvedRel * (1.0 + level))
    throw LeavesNotEquicurved("S_{r+1} varies along the foliation");

  const AmbientChart& chart = *ctx.chart;
  const LeafPatch& leaf = *ctx.leaf;
  ScalarField f = normal_component(chart, leaf, v);
  Eigen::MatrixXd df = gradient(f);

  Eigen::VectorXd cond(long(leaf.size()));
  for_nodes(leaf.size(), [&](std::size_t node) {
    Eigen::VectorXd p = leaf.points.row(long(node));
    Eigen::MatrixXd frame = orthonormal_tangent_frame(leaf, node);
    Eigen::VectorXd y = leaf.chol[node]
                            .triangularView<Eigen::Lower>()
                            .solve(df.row(long(node)).transpose());
    Eigen::VectorXd acc_t =
        frame.transpose() * chart.metric(p) * slice.nabla_n_n.row(long(node)).transpose();
    cond(long(node)) = (y + f.values(long(node)) * acc_t).norm();
  });

  ScalarField jf = j_r(ctx, f);
  PreservationReport out;
  out.condition_residual = cond.maxCoeff();
  out.jacobi_residual = jf.values.cwiseAbs().maxCoeff();
  out.scale = residual_scale(ctx, v);
  return out;
}

}  // namespace foliage
