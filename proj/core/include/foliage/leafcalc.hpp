#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "foliage/ambient.hpp"
#include "foliage/hypersurface.hpp"

namespace foliage {

// rbar must match (n - r) c S_r pointwise on a constant-curvature ambient
inline constexpr double kSpaceFormTermRel = 1e-8;

// Scalar samples bound to the leaf they were sampled on. kind picks the
// stencil closures on interior axes: test fields are assumed to vanish near
// those edges, geometry fields (curvature data, normal components of ambient
// fields) fall back to one-sided stencils there. Periodic and polar axes
// behave the same either way.
struct ScalarField {
  const LeafPatch* leaf = nullptr;
  Eigen::VectorXd values;
  FieldKind kind = FieldKind::test;
};

ScalarField make_field(const LeafPatch& leaf,
                       const std::function<double(const Eigen::VectorXd&)>& fn,
                       FieldKind kind = FieldKind::test);
ScalarField make_field(const LeafPatch& leaf, Eigen::VectorXd values,
                       FieldKind kind = FieldKind::test);

// coordinate components of df, node rows
Eigen::MatrixXd gradient(const ScalarField& f);

// second covariant derivative with one index raised, per node; its trace is
// the laplacian of the induced metric
std::vector<Eigen::MatrixXd> covariant_hessian(const ScalarField& f);

double integrate(const ScalarField& f);
double integrate_squared(const ScalarField& f);

// Two assemblies of the same operator: the trace form contracts the
// transformation against the covariant hessian; the divergence form
// differentiates the flux T grad f and subtracts the divergence of T.
enum class OperatorForm { trace, divergence };

// Everything the curvature operators of one leaf need: the transformation
// tower at level r, the quadratic curvature trace, the ambient term, and the
// classification that decides which identities may be asserted.
struct OperatorContext {
  const AmbientChart* chart = nullptr;
  const LeafPatch* leaf = nullptr;
  int r = 0;
  CurvatureFields fields;
  Eigen::VectorXd a2t;   // Tr(A^2 T_r) per node
  Eigen::VectorXd rbar;  // Tr(Rbar(N) T_r) per node
  Classification ambient_class;
};

OperatorContext make_context(const AmbientChart& chart, const LeafPatch& leaf, int r,
                             unsigned classify_seed = 7);

ScalarField l_r(const OperatorContext& ctx, const ScalarField& f,
                OperatorForm form = OperatorForm::trace);
// l_r plus multiplication by Tr(A^2 T_r) + Tr(Rbar(N) T_r)
ScalarField j_r(const OperatorContext& ctx, const ScalarField& f,
                OperatorForm form = OperatorForm::trace);

// quadratic form -int f (j_r g); symmetric whenever T_r is divergence free
double i_r(const OperatorContext& ctx, const ScalarField& f, const ScalarField& g);

// int <T_r grad f, grad g>, the first-order part of i_r after integration by
// parts
double newton_dirichlet(const OperatorContext& ctx, const ScalarField& f,
                        const ScalarField& g);

// Closed-leaf checks that l_r integrates to zero and pairs with the dirichlet
// form. Throws CaseNotApplicable unless the ambient classification supports a
// divergence-free T_r: any ambient at r = 0, einstein at r = 1, constant
// curvature beyond.
struct DivergenceResiduals {
  double conservation = 0.0;  // |int l_r f|
  double parts = 0.0;         // |int f l_r f + int <T_r grad f, grad f>|
};

DivergenceResiduals divergence_residuals(const OperatorContext& ctx, const ScalarField& f);

}  // namespace foliage
