#include "foliage/hypersurface.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstddef>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"
#include "foliage/symcurv.hpp"
#include "node_loops.hpp"

namespace foliage {
namespace {

constexpr double kDegenerateRel = 1e-10;
// wide stencil for the warping rate so the nested differencing in
// foliation_normal_data stays below its own noise floor
constexpr double kWarpProbeStep = 1e-2;

using detail::column_field;
using detail::for_nodes;

int sym_slot(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n + j - i * (i + 1) / 2;
}

Eigen::VectorXd representative_point(const WarpedSpec& spec, double t) {
  const auto& axes =
      spec.kind == WarpedSpec::Kind::diagonal ? spec.leaf_domain : spec.leaf.domain;
  Eigen::VectorXd p(long(axes.size()) + 1);
  p(0) = t;
  for (std::size_t i = 0; i < axes.size(); ++i)
    p(long(i) + 1) = 0.5 * (axes[i].lo + axes[i].hi);
  return p;
}

void check_slice_inputs(const WarpedSpec& spec, int r, double t) {
  if (t < spec.t_lo || t > spec.t_hi) throw OutsideDomain("slice parameter outside the family interval");
  int n = spec.kind == WarpedSpec::Kind::diagonal ? int(spec.phi.size()) : spec.leaf.dim();
  if (r < 0 || r > n) throw InvalidSpec("transformation order out of range for the leaf dimension");
}

}  // namespace

LeafPatch build_leaf(const AmbientChart& chart, const ImmersionSpec& immersion,
                     const Grid& grid, DerivMode mode) {
  if (!immersion.map || !immersion.normal_seed)
    throw InvalidSpec("immersion needs a map and a normal seed");
  const int n = grid.dim();
  const int m = chart.dim();
  if (m != n + 1) throw InvalidSpec("leaf must have codimension one in the chart");
  const std::size_t count = grid.size();

  LeafPatch leaf;
  leaf.n = n;
  leaf.ambient_dim = m;
  leaf.grid = grid;
  leaf.mode = mode;
  leaf.points.resize(long(count), m);

  for_nodes(count, [&](std::size_t i) {
    Eigen::VectorXd x = immersion.map(grid.point(i));
    if (int(x.size()) != m) throw InvalidSpec("immersion lands in the wrong dimension");
    leaf.points.row(long(i)) = x;
  });

  leaf.tangents.assign(std::size_t(n), Eigen::MatrixXd(long(count), m));
  if (immersion.jacobian) {
    for_nodes(count, [&](std::size_t i) {
      Eigen::MatrixXd jac = immersion.jacobian(grid.point(i));
      if (jac.rows() != m || jac.cols() != n)
        throw InvalidSpec("immersion jacobian has the wrong shape");
      for (int ax = 0; ax < n; ++ax) leaf.tangents[std::size_t(ax)].row(long(i)) = jac.col(ax);
    });
  } else {
    for (int a = 0; a < m; ++a) {
      std::vector<double> f = column_field(leaf.points, a);
      for (int ax = 0; ax < n; ++ax) {
        std::vector<double> df = grid.d1(f, ax, mode, FieldKind::geometry);
        for (std::size_t i = 0; i < count; ++i)
          leaf.tangents[std::size_t(ax)](long(i), a) = df[i];
      }
    }
  }

  std::vector<Eigen::MatrixXd> gbar(count);
  for_nodes(count, [&](std::size_t i) { gbar[i] = chart.metric(leaf.points.row(long(i))); });

  leaf.normal.resize(long(count), m);
  for_nodes(count, [&](std::size_t i) {
    Eigen::MatrixXd rows(n, m);
    for (int ax = 0; ax < n; ++ax)
      rows.row(ax) = leaf.tangents[std::size_t(ax)].row(long(i)) * gbar[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= kDegenerateRel * (1.0 + sv(0)))
      throw DegenerateImmersion("tangent directions are linearly dependent");
    Eigen::VectorXd nrm = svd.matrixV().col(m - 1);
    nrm /= std::sqrt(nrm.dot(gbar[i] * nrm));

    Eigen::VectorXd seed = immersion.normal_seed(leaf.points.row(long(i)));
    if (int(seed.size()) != m) throw InvalidSpec("normal seed has the wrong dimension");
    double side = nrm.dot(gbar[i] * seed);
    double seed_len = std::sqrt(std::max(seed.dot(gbar[i] * seed), 0.0));
    if (std::abs(side) <= 1e-10 * (1.0 + seed_len))
      throw PreconditionFailed("normal seed does not pick a side of the leaf");
    if (side < 0.0) nrm = -nrm;
    leaf.normal.row(long(i)) = nrm;

    if (std::abs(nrm.dot(gbar[i] * nrm) - 1.0) > kUnitNormalTol)
      throw NumericalContractViolation("normal failed to normalize");
    for (int ax = 0; ax < n; ++ax) {
      double tl = std::sqrt(rows.row(ax).dot(leaf.tangents[std::size_t(ax)].row(long(i))));
      if (std::abs(rows.row(ax).dot(nrm)) > kTangencyTol * (1.0 + tl))
        throw NumericalContractViolation("normal lost tangency");
    }
  });

  std::vector<Eigen::MatrixXd> dnormal(std::size_t(n), Eigen::MatrixXd(long(count), m));
  for (int a = 0; a < m; ++a) {
    std::vector<double> f = column_field(leaf.normal, a);
    for (int ax = 0; ax < n; ++ax) {
      std::vector<double> df = grid.d1(f, ax, mode, FieldKind::geometry);
      for (std::size_t i = 0; i < count; ++i) dnormal[std::size_t(ax)](long(i), a) = df[i];
    }
  }

  leaf.induced_metric.assign(count, Eigen::MatrixXd(n, n));
  leaf.chol.assign(count, Eigen::MatrixXd(n, n));
  leaf.shape.assign(count, Eigen::MatrixXd(n, n));
  leaf.shape_sym.assign(count, Eigen::MatrixXd(n, n));
  leaf.kappa.resize(long(count), n);
  leaf.volume_weights.resize(long(count));

  for_nodes(count, [&](std::size_t i) {
    const Eigen::MatrixXd& gb = gbar[i];
    Tensor3 gamma = chart.christoffels(leaf.points.row(long(i)));

    Eigen::MatrixXd dcov(n, m);
    for (int ax = 0; ax < n; ++ax)
      for (int a = 0; a < m; ++a) {
        double s = dnormal[std::size_t(ax)](long(i), a);
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c)
            s += gamma(a, b, c) * leaf.tangents[std::size_t(ax)](long(i), b) *
                 leaf.normal(long(i), c);
        dcov(ax, a) = s;
      }

    Eigen::MatrixXd g(n, n), bform(n, n);
    for (int ax = 0; ax < n; ++ax)
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd tj = leaf.tangents[std::size_t(j)].row(long(i)).transpose();
        g(ax, j) = leaf.tangents[std::size_t(ax)].row(long(i)) * gb * tj;
        bform(ax, j) = -dcov.row(ax) * gb * tj;
      }
    g = 0.5 * (g + g.transpose()).eval();

    double asym = (bform - bform.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSecondFormSymTol * (1.0 + bform.cwiseAbs().maxCoeff()))
      throw NumericalContractViolation("second fundamental form lost symmetry");
    bform = 0.5 * (bform + bform.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
      throw DegenerateImmersion("induced metric is not positive definite");
    Eigen::MatrixXd lower = llt.matrixL();

    Eigen::MatrixXd half = lower.triangularView<Eigen::Lower>().solve(bform);
    Eigen::MatrixXd sym =
        lower.triangularView<Eigen::Lower>().solve(half.transpose()).transpose();
    sym = 0.5 * (sym + sym.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    leaf.kappa.row(long(i)) = eig.eigenvalues();
    leaf.induced_metric[i] = g;
    leaf.chol[i] = lower;
    leaf.shape_sym[i] = sym;
    leaf.shape[i] = llt.solve(bform);
    leaf.volume_weights(long(i)) = grid.weight(i) * lower.diagonal().prod();
  });

  const int slots = n * (n + 1) / 2;
  std::vector<std::vector<double>> dg(std::size_t(slots * n));
  {
    std::vector<double> comp(count);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        for (std::size_t i = 0; i < count; ++i) comp[i] = leaf.induced_metric[i](a, b);
        for (int k = 0; k < n; ++k)
          dg[std::size_t(sym_slot(a, b, n) * n + k)] = grid.d1(comp, k, mode, FieldKind::geometry);
      }
  }

  leaf.christoffels_leaf.assign(count, Tensor3(n));
  for_nodes(count, [&](std::size_t i) {
    const Eigen::MatrixXd& lower = leaf.chol[i];
    Tensor3 lg(n);
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        Eigen::VectorXd rhs(n);
        for (int l = 0; l < n; ++l)
          rhs(l) = dg[std::size_t(sym_slot(c, l, n) * n + b)][i] +
                   dg[std::size_t(sym_slot(b, l, n) * n + c)][i] -
                   dg[std::size_t(sym_slot(b, c, n) * n + l)][i];
        Eigen::VectorXd y = lower.triangularView<Eigen::Lower>().solve(rhs);
        Eigen::VectorXd w = lower.transpose().triangularView<Eigen::Upper>().solve(y);
        for (int a = 0; a < n; ++a) {
          lg(a, b, c) = 0.5 * w(a);
          lg(a, c, b) = 0.5 * w(a);
        }
      }
    leaf.christoffels_leaf[i] = lg;
  });

  return leaf;
}

Eigen::MatrixXd orthonormal_tangent_frame(const LeafPatch& leaf, std::size_t node) {
  Eigen::MatrixXd tan(leaf.ambient_dim, leaf.n);
  for (int ax = 0; ax < leaf.n; ++ax)
    tan.col(ax) = leaf.tangents[std::size_t(ax)].row(long(node));
  return leaf.chol[node]
      .triangularView<Eigen::Lower>()
      .solve(tan.transpose())
      .transpose();
}

CurvatureFields curvature_fields(const LeafPatch& leaf, int r) {
  if (r < 0 || r > leaf.n)
    throw InvalidSpec("transformation order out of range for the leaf dimension");
  const std::size_t count = leaf.size();
  CurvatureFields out;
  out.r = r;
  out.s_r.resize(long(count));
  out.s_next.resize(long(count));
  out.h_r.resize(long(count));
  out.newton.assign(count, Eigen::MatrixXd());
  out.newton_sym.assign(count, Eigen::MatrixXd());
  out.mu.resize(long(count), leaf.n);

  for_nodes(count, [&](std::size_t i) {
    CurvatureVector kv{leaf.kappa.row(long(i)).transpose()};
    MeanCurvatures mc = mean_curvatures(kv);
    out.s_r(long(i)) = mc.s(r);
    out.s_next(long(i)) = r + 1 <= leaf.n ? mc.s(r + 1) : 0.0;
    out.h_r(long(i)) = mc.h(r);

    Eigen::MatrixXd tsym = newton_by_recursion(leaf.shape_sym[i])[std::size_t(r)];
    const Eigen::MatrixXd& lower = leaf.chol[i];
    out.newton_sym[i] = tsym;
    out.newton[i] =
        lower.transpose().triangularView<Eigen::Upper>().solve(tsym) * lower.transpose();
    out.mu.row(long(i)) = newton_by_spectrum(kv, r).mu;
  });

  double mean = out.s_next.mean();
  out.tense_deviation = (out.s_next.array() - mean).abs().maxCoeff();
  out.tense = out.tense_deviation < kConstancyRel * (1.0 + std::abs(mean));
  return out;
}

Eigen::VectorXd warped_kappa(const WarpedSpec& spec, double t) {
  if (spec.kind == WarpedSpec::Kind::diagonal) {
    if (spec.phi.empty()) throw InvalidSpec("diagonal warped spec carries no rates");
    Eigen::VectorXd kap(long(spec.phi.size()));
    for (std::size_t i = 0; i < spec.phi.size(); ++i) kap(long(i)) = spec.phi[i](t);
    return kap;
  }
  if (spec.w.empty() || spec.leaf.dim() == 0)
    throw InvalidSpec("isotropic warped spec needs a factor and a leaf");
  double w = spec.w(t);
  if (!(w > 0.0)) throw InvalidSpec("warping factor must stay positive");
  double dw = richardson_d1([&](double s) { return spec.w(s); }, t, kWarpProbeStep);
  return Eigen::VectorXd::Constant(spec.leaf.dim(), -dw / w);
}

NormalData foliation_normal_data(const WarpedSpec& spec, int r, double t) {
  check_slice_inputs(spec, r, t);
  NormalData out;
  Eigen::VectorXd kap = warped_kappa(spec, t);
  NewtonSpectrum spectrum = newton_by_spectrum(CurvatureVector{kap}, r);
  out.mu = spectrum.mu;
  double lo = out.mu.minCoeff(), hi = out.mu.maxCoeff();
  if (lo >= -kOperatorSignTol)
    out.sign = OperatorSign::positive_semidefinite;
  else if (hi <= kOperatorSignTol)
    out.sign = OperatorSign::negative_semidefinite;
  else
    out.sign = OperatorSign::indefinite;

  out.ds_next = richardson_d1(
      [&](double s) { return sigma(r + 1, warped_kappa(spec, s)); }, t, kNormalRateStep);

  AmbientChart chart = make_warped(spec);
  Tensor3 gamma = chart.christoffels(representative_point(spec, t));
  out.nabla_n_n.resize(chart.dim());
  for (int a = 0; a < chart.dim(); ++a) out.nabla_n_n(a) = gamma(a, 0, 0);
  return out;
}

FoliationSlice foliation_slice(const WarpedSpec& spec, const Grid& leaf_grid, int r, double t,
                               DerivMode mode) {
  check_slice_inputs(spec, r, t);
  const auto& axes =
      spec.kind == WarpedSpec::Kind::diagonal ? spec.leaf_domain : spec.leaf.domain;
  if (std::size_t(leaf_grid.dim()) != axes.size())
    throw InvalidSpec("slice grid dimension does not match the leaf");
  for (int ax = 0; ax < leaf_grid.dim(); ++ax) {
    const auto& gs = leaf_grid.spec(ax);
    const auto& da = axes[std::size_t(ax)];
    bool kind_ok = da.periodic ? gs.kind == AxisKind::periodic : gs.kind == AxisKind::interior;
    if (!kind_ok || std::abs(gs.lo - da.lo) > 1e-12 || std::abs(gs.hi - da.hi) > 1e-12)
      throw InvalidSpec("slice grid axes must match the leaf domain");
  }

  AmbientChart chart = make_warped(spec);
  const int m = chart.dim();
  ImmersionSpec imm;
  imm.name = "slice";
  imm.map = [t, m](const Eigen::VectorXd& u) {
    Eigen::VectorXd p(m);
    p(0) = t;
    p.tail(m - 1) = u;
    return p;
  };
  imm.normal_seed = [m](const Eigen::VectorXd&) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    s(0) = 1.0;
    return s;
  };
  imm.jacobian = [m](const Eigen::VectorXd&) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m - 1);
    jac.bottomRows(m - 1).setIdentity();
    return jac;
  };

  FoliationSlice slice;
  slice.t = t;
  slice.r = r;
  slice.leaf = build_leaf(chart, imm, leaf_grid, mode);

  NormalData data = foliation_normal_data(spec, r, t);
  const std::size_t count = slice.leaf.size();
  slice.ds_next = Eigen::VectorXd::Constant(long(count), data.ds_next);
  slice.nabla_n_n.resize(long(count), m);
  for_nodes(count, [&](std::size_t i) {
    Tensor3 gamma = chart.christoffels(slice.leaf.points.row(long(i)));
    for (int a = 0; a < m; ++a) slice.nabla_n_n(long(i), a) = gamma(a, 0, 0);
  });
  return slice;
}

}  // namespace foliage
