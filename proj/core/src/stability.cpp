#include "foliage/stability.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"
#include "foliage/symcurv.hpp"

namespace foliage {

namespace {

double quad(const LeafPatch& leaf, const Eigen::VectorXd& integrand) {
  Eigen::VectorXd terms = leaf.volume_weights.cwiseProduct(integrand);
  return pairwise_sum(terms.data(), std::size_t(terms.size()));
}

double condition_of(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  double lo = eig.eigenvalues().minCoeff();
  double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

bool order_licensed(const Classification& amb, int r) {
  if (r == 0) return true;
  if (r == 1)
    return amb.kind == Classification::Kind::einstein ||
           amb.kind == Classification::Kind::space_form;
  return amb.kind == Classification::Kind::space_form;
}

}  // namespace

ZeroMeanBasis make_zero_mean_basis(const LeafPatch& leaf, std::vector<ScalarField> raw) {
  if (raw.empty()) throw InvalidSpec("basis needs at least one function");
  for (const auto& f : raw)
    if (f.leaf != &leaf) throw MismatchedLeaf("basis function lives on another leaf");

  double vol = pairwise_sum(leaf.volume_weights.data(), std::size_t(leaf.volume_weights.size()));
  ZeroMeanBasis basis;
  basis.leaf = &leaf;
  for (auto& f : raw) {
    f.values.array() -= integrate(f) / vol;
    if (std::abs(integrate(f)) > kZeroMeanTol * vol)
      throw NumericalContractViolation("mean projection failed");

    std::size_t k = basis.functions.size();
    Eigen::MatrixXd mass(k + 1, k + 1);
    mass.topLeftCorner(long(k), long(k)) = basis.gram_mass;
    for (std::size_t i = 0; i < k; ++i) {
      double m = quad(leaf, basis.functions[i].values.cwiseProduct(f.values));
      mass(long(i), long(k)) = m;
      mass(long(k), long(i)) = m;
    }
    mass(long(k), long(k)) = quad(leaf, f.values.cwiseProduct(f.values));
    if (condition_of(mass) > kMassConditionMax) continue;
    basis.functions.push_back(std::move(f));
    basis.gram_mass = std::move(mass);
  }
  if (basis.functions.empty()) throw InvalidSpec("basis collapsed to the mean component");
  return basis;
}

ZeroMeanBasis fourier_basis(const LeafPatch& leaf, int modes_per_axis) {
  if (modes_per_axis < 1) throw InvalidSpec("need at least one mode per axis");
  const double pi = std::acos(-1.0);
  std::vector<ScalarField> raw;
  for (int a = 0; a < leaf.n; ++a) {
    double lo = leaf.grid.spec(a).lo;
    double hi = leaf.grid.spec(a).hi;
    bool wraps = leaf.grid.wraps(a);
    for (int m = 1; m <= modes_per_axis; ++m) {
      auto phase = [=](const Eigen::VectorXd& u) {
        if (wraps) return 2.0 * pi * m * (u(a) - lo) / (hi - lo);
        return pi * m * (2.0 * u(a) - lo - hi) / (hi - lo);
      };
      auto window = [=](const Eigen::VectorXd& u) {
        if (wraps) return 1.0;
        double x = (2.0 * u(a) - lo - hi) / (hi - lo);
        if (std::abs(x) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - x * x));
      };
      raw.push_back(make_field(
          leaf, [=](const Eigen::VectorXd& u) { return window(u) * std::sin(phase(u)); }));
      raw.push_back(make_field(
          leaf, [=](const Eigen::VectorXd& u) { return window(u) * std::cos(phase(u)); }));
    }
  }
  return make_zero_mean_basis(leaf, std::move(raw));
}

StabilityReport criterion_signs(const OperatorContext& ctx, const FoliationSlice& slice) {
  if (ctx.leaf != &slice.leaf || ctx.r != slice.r)
    throw InvalidSpec("context and slice disagree on leaf or order");

  StabilityReport rep;
  rep.r = ctx.r;
  rep.surveyed = true;
  rep.tense = ctx.fields.tense;
  rep.hypothesis_ok = order_licensed(ctx.ambient_class, ctx.r);

  double lam_lo = std::numeric_limits<double>::max();
  double lam_hi = std::numeric_limits<double>::lowest();
  for (std::size_t i = 0; i < slice.leaf.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ctx.fields.newton_sym[i]);
    lam_lo = std::min(lam_lo, eig.eigenvalues().minCoeff());
    lam_hi = std::max(lam_hi, eig.eigenvalues().maxCoeff());
  }
  double tol_t = kGramSignRel * (1.0 + std::max(std::abs(lam_lo), std::abs(lam_hi)));
  bool psd = lam_lo >= -tol_t;
  bool nsd = lam_hi <= tol_t;
  rep.newton_sign = psd   ? OperatorSign::positive_semidefinite
                    : nsd ? OperatorSign::negative_semidefinite
                          : OperatorSign::indefinite;

  double rate_lo = slice.ds_next.minCoeff();
  double rate_hi = slice.ds_next.maxCoeff();
  double tol_r = kGramSignRel * (1.0 + std::max(std::abs(rate_lo), std::abs(rate_hi)));
  bool nonpos = rate_hi <= tol_r;
  bool nonneg = rate_lo >= -tol_r;
  rep.rate_sign = nonpos   ? RateSign::nonpositive
                  : nonneg ? RateSign::nonnegative
                           : RateSign::mixed;

  rep.criterion_met = rep.tense && ((psd && nonpos) || (nsd && nonneg));
  rep.verdict = !rep.criterion_met ? Verdict::inconclusive
                : psd              ? Verdict::stable_nonnegative
                                   : Verdict::stable_nonpositive;
  return rep;
}

StabilityReport gram_stability(const OperatorContext& ctx, const ZeroMeanBasis& basis) {
  if (basis.leaf != ctx.leaf) throw MismatchedLeaf("basis lives on another leaf");
  std::size_t k = basis.functions.size();

  Eigen::MatrixXd q(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    ScalarField jf = j_r(ctx, basis.functions[j]);
    for (std::size_t i = 0; i < k; ++i)
      q(long(i), long(j)) = -quad(*ctx.leaf, basis.functions[i].values.cwiseProduct(jf.values));
  }
  q = ((q + q.transpose()) / 2.0).eval();

  StabilityReport rep;
  rep.r = ctx.r;
  rep.tense = ctx.fields.tense;
  rep.hypothesis_ok = order_licensed(ctx.ambient_class, ctx.r);
  rep.subspace_dim = int(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  rep.gram_spectrum = eig.eigenvalues();

  double thr = kGramSignRel * rep.gram_spectrum.cwiseAbs().maxCoeff();
  bool has_neg = rep.gram_spectrum.minCoeff() < -thr;
  bool has_pos = rep.gram_spectrum.maxCoeff() > thr;
  rep.verdict = has_neg && has_pos ? Verdict::unstable
                : has_neg          ? Verdict::stable_nonpositive
                                   : Verdict::stable_nonnegative;
  return rep;
}

IdentityResidual quadratic_form_identity(const OperatorContext& ctx, const FoliationSlice& slice,
                                         const ScalarField& f) {
  if (ctx.leaf != &slice.leaf || ctx.r != slice.r)
    throw InvalidSpec("context and slice disagree on leaf or order");
  if (f.leaf != ctx.leaf) throw MismatchedLeaf("field lives on another leaf");

  const LeafPatch& leaf = slice.leaf;
  Eigen::MatrixXd df = gradient(f);
  Eigen::VectorXd form_part(leaf.size());
  Eigen::VectorXd rate_part(leaf.size());
  for (std::size_t i = 0; i < leaf.size(); ++i) {
    Eigen::VectorXd y =
        leaf.chol[i].triangularView<Eigen::Lower>().solve(df.row(long(i)).transpose());
    Eigen::MatrixXd frame = orthonormal_tangent_frame(leaf, i);
    Eigen::VectorXd p = leaf.points.row(long(i));
    Eigen::VectorXd acc =
        frame.transpose() * ctx.chart->metric(p) * slice.nabla_n_n.row(long(i)).transpose();
    Eigen::VectorXd x = y + f.values(long(i)) * acc;
    form_part(long(i)) = x.dot(ctx.fields.newton_sym[i] * x);
    rate_part(long(i)) = f.values(long(i)) * f.values(long(i)) * slice.ds_next(long(i));
  }

  IdentityResidual out;
  double t1 = quad(leaf, form_part);
  double t2 = quad(leaf, rate_part);
  out.quadratic_form = i_r(ctx, f, f);
  out.residual = std::abs(t1 - t2 - out.quadratic_form);
  out.scale = std::max({1.0, std::abs(t1), std::abs(t2), std::abs(out.quadratic_form)});
  return out;
}

double ar_functional(const LeafPatch& leaf, int r, double c) {
  if (r < 0 || r > leaf.n) throw InvalidSpec("order out of range for the leaf");
  Eigen::VectorXd integrand(leaf.size());
  for (std::size_t i = 0; i < leaf.size(); ++i) {
    Eigen::VectorXd s = sigma_all(leaf.kappa.row(long(i)));
    integrand(long(i)) = f_r_sequence(s, c, leaf.n, r)[std::size_t(r)];
  }
  return quad(leaf, integrand);
}

double ar_functional(const OperatorContext& ctx) {
  if (ctx.ambient_class.kind != Classification::Kind::space_form)
    throw CaseNotApplicable("area-type functional needs a space-form ambient");
  return ar_functional(*ctx.leaf, ctx.r, ctx.ambient_class.c);
}

SecondVariationProbe second_variation_probe(const OperatorContext& ctx, const ScalarField& f,
                                            double step) {
  if (ctx.ambient_class.kind != Classification::Kind::space_form)
    throw CaseNotApplicable("area-type functional needs a space-form ambient");
  if (f.leaf != ctx.leaf) throw MismatchedLeaf("field lives on another leaf");
  if (!(step > 0.0)) throw InvalidSpec("step must be positive");

  const LeafPatch& base = *ctx.leaf;
  Eigen::MatrixXd df = gradient(f);
  std::vector<Eigen::MatrixXd> dn(std::size_t(base.n));
  {
    std::vector<double> comp(base.size());
    for (int a = 0; a < base.n; ++a) {
      dn[std::size_t(a)].resize(long(base.size()), base.ambient_dim);
      for (int k = 0; k < base.ambient_dim; ++k) {
        for (std::size_t i = 0; i < base.size(); ++i) comp[i] = base.normal(long(i), k);
        std::vector<double> d = base.grid.d1(comp, a, base.mode, FieldKind::geometry);
        for (std::size_t i = 0; i < base.size(); ++i) dn[std::size_t(a)](long(i), k) = d[i];
      }
    }
  }
  auto node_of = [&base](const Eigen::VectorXd& u) -> std::size_t {
    for (std::size_t i = 0; i < base.size(); ++i) {
      bool match = true;
      for (int a = 0; a < base.n; ++a)
        if (base.grid.coordinate(i, a) != u(a)) {
          match = false;
          break;
        }
      if (match) return i;
    }
    throw InvalidSpec("variation probed off the grid");
  };
  auto displaced = [&](double s) {
    ImmersionSpec imm;
    imm.name = "normal-graph";
    imm.map = [&, s](const Eigen::VectorXd& u) {
      std::size_t i = node_of(u);
      return Eigen::VectorXd(base.points.row(long(i)).transpose() +
                             s * f.values(long(i)) * base.normal.row(long(i)).transpose());
    };
    imm.jacobian = [&, s](const Eigen::VectorXd& u) {
      std::size_t i = node_of(u);
      Eigen::MatrixXd jac(base.ambient_dim, base.n);
      for (int a = 0; a < base.n; ++a)
        jac.col(a) = base.tangents[std::size_t(a)].row(long(i)).transpose() +
                     s * (df(long(i), a) * base.normal.row(long(i)).transpose() +
                          f.values(long(i)) * dn[std::size_t(a)].row(long(i)).transpose());
      return jac;
    };
    imm.normal_seed = [&base](const Eigen::VectorXd& p) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (std::size_t i = 0; i < base.size(); ++i) {
        double d = (base.points.row(long(i)).transpose() - p).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return Eigen::VectorXd(base.normal.row(long(best)).transpose());
    };
    return build_leaf(*ctx.chart, imm, base.grid, base.mode);
  };

  double c = ctx.ambient_class.c;
  double a_mid = ar_functional(base, ctx.r, c);
  double a_up = ar_functional(displaced(step), ctx.r, c);
  double a_down = ar_functional(displaced(-step), ctx.r, c);

  SecondVariationProbe probe;
  probe.second_difference = (a_up - 2.0 * a_mid + a_down) / (step * step);
  probe.quadratic_form = double(ctx.r + 1) * i_r(ctx, f, f);
  probe.gap = std::abs(probe.second_difference - probe.quadratic_form) /
              std::max(1.0, std::abs(probe.quadratic_form));
  return probe;
}

std::string describe(const StabilityReport& rep) {
  std::ostringstream out;
  out << "leaf: " << (rep.leaf.empty() ? "(unnamed)" : rep.leaf) << "\n";
  out << "order: " << rep.r << "\n";
  out << "tense: " << (rep.tense ? "yes" : "no") << "\n";
  out << "ambient hypothesis: " << (rep.hypothesis_ok ? "satisfied" : "not satisfied") << "\n";
  if (rep.surveyed) {
    const char* ns = rep.newton_sign == OperatorSign::positive_semidefinite   ? ">= 0"
                     : rep.newton_sign == OperatorSign::negative_semidefinite ? "<= 0"
                                                                              : "indefinite";
    const char* rs = rep.rate_sign == RateSign::nonpositive   ? "<= 0"
                     : rep.rate_sign == RateSign::nonnegative ? ">= 0"
                                                              : "mixed";
    out << "newton transformation: " << ns << "\n";
    out << "curvature rate along the normal: " << rs << "\n";
    out << "criterion met: " << (rep.criterion_met ? "yes" : "no") << "\n";
  }
  if (rep.gram_spectrum.size() > 0) {
    out << "gram spectrum:";
    for (long i = 0; i < rep.gram_spectrum.size(); ++i) out << " " << rep.gram_spectrum(i);
    out << "\n";
  }
  out << "verdict: ";
  switch (rep.verdict) {
    case Verdict::stable_nonnegative: out << "stable (form >= 0)"; break;
    case Verdict::stable_nonpositive: out << "stable (form <= 0)"; break;
    case Verdict::unstable: out << "unstable"; break;
    case Verdict::inconclusive: out << "inconclusive"; break;
  }
  if (rep.subspace_dim > 0) out << " on tested subspace (dim " << rep.subspace_dim << ")";
  out << "\n";
  return out.str();
}

}  // namespace foliage
