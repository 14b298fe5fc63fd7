#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "foliage/ambient.hpp"
#include "foliage/hypersurface.hpp"
#include "foliage/leafcalc.hpp"

namespace foliage {

inline constexpr double kKillingFactorTol = 1e-8;      // |k| bound for a killing verdict
inline constexpr double kConformalResidualTol = 1e-7;  // |L_U g - 2 k g| bound
inline constexpr double kVariationResidualRel = 5e-5;  // operator-identity contracts
inline constexpr double kGradientFormulaTol = 1e-6;
inline constexpr double kNormalFactorStep = 1e-4;  // rate of k along the normal
inline constexpr double kFieldProbeRel = 1e-4;     // dU stencils, relative to axis span
inline constexpr double kEquicurvedRel = 1e-7;     // S_{r+1} drift across leaves

enum class FlowKind { unknown, killing, conformal, generic };

// An ambient vector field given by its contravariant components in the chart
// coordinates. declared is a hint from the catalog; verdicts always come from
// conformal_factor.
struct AmbientVectorField {
  std::string name;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  FlowKind declared = FlowKind::unknown;
};

// Catalog entries, addressable from configs through parse_field. Axis indices
// are zero-based; the declared kinds assume a euclidean chart.
AmbientVectorField translation_field(int axis, int dim);
AmbientVectorField rotation_field(int i, int j, int dim);
AmbientVectorField position_field(int dim);
// profile(t) d/dt on a warped chart whose first coordinate is t
AmbientVectorField warped_normal_field(const Expr& profile, int dim);
// "translation(a)", "rotation(i,j)", "position", "warped-normal(expr)"
AmbientVectorField parse_field(const std::string& source, int dim);

// Lie-derivative classification of the field over a point sample: conformal
// when L_U g = 2 k g within kConformalResidualTol, killing when k also
// vanishes, generic otherwise.
struct ConformalReport {
  Eigen::VectorXd k;  // half the conformal factor at each sample
  double max_deviation = 0.0;
  FlowKind verdict = FlowKind::generic;
};

ConformalReport conformal_factor(const AmbientChart& chart, const AmbientVectorField& u,
                                 const std::vector<Eigen::VectorXd>& samples);

// f = <U, N> per node (a geometry field: no compact support assumed)
ScalarField normal_component(const AmbientChart& chart, const LeafPatch& leaf,
                             const AmbientVectorField& u);

// max-node frame norm of grad f + (ambient derivative of U along N)^tan + A U^tan,
// which vanishes identically for conformal U
double gradient_formula_residual(const AmbientChart& chart, const LeafPatch& leaf,
                                 const AmbientVectorField& u);

// common normalization for the operator-identity contracts:
// max(1, |A|^{r+2} |U|) over the leaf
double residual_scale(const OperatorContext& ctx, const AmbientVectorField& u);

// max node |J_r f - RHS| for conformal U, where f = <U,N> and
// RHS = -U^tan(S_{r+1}) - (r+1) k S_{r+1} - N(k) (n-r) S_r.
// For killing U the rate terms drop and the identity holds with no constancy
// assumption on the curvatures.
double conformal_flow_residual(const OperatorContext& ctx, const AmbientVectorField& u);

// Normal components of killing fields over a leaf with constant S_{r+1} lie
// in the kernel of J_r; the check reports the measured residual.
struct JacobiReport {
  bool is_jacobi = false;
  double residual = 0.0;
  double scale = 1.0;
};

JacobiReport jacobi_check(const OperatorContext& ctx, const AmbientVectorField& u);

// Infinitesimal leaf-preservation test for a field V over a warped foliation
// whose leaves all share one constant S_{r+1}: condition_residual measures
// max |grad f + f (ambient acceleration of N)| and must force jacobi_residual
// = max |J_r f| to vanish with it. The converse is not asserted.
struct PreservationReport {
  double condition_residual = 0.0;
  double jacobi_residual = 0.0;
  double scale = 1.0;
};

PreservationReport foliation_preserving_residual(const OperatorContext& ctx,
                                                 const FoliationSlice& slice,
                                                 const AmbientVectorField& v);

}  // namespace foliage
