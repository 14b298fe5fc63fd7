#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "foliage/hypersurface.hpp"
#include "foliage/leafcalc.hpp"

namespace foliage {

inline constexpr double kZeroMeanTol = 1e-10;     // |mean f| after projection
inline constexpr double kMassConditionMax = 1e8;  // basis independence bound
inline constexpr double kGramSignRel = 1e-8;      // eigenvalue sign threshold
inline constexpr double kIdentityResidualRel = 1e-6;

enum class RateSign { nonpositive, nonnegative, mixed };

enum class Verdict { stable_nonnegative, stable_nonpositive, unstable, inconclusive };

// Span of mean-free functions over one leaf. make_zero_mean_basis projects the
// mean component out of each entry and drops entries that would push the mass
// matrix past kMassConditionMax.
struct ZeroMeanBasis {
  const LeafPatch* leaf = nullptr;
  std::vector<ScalarField> functions;
  Eigen::MatrixXd gram_mass;  // integrals of products
};

ZeroMeanBasis make_zero_mean_basis(const LeafPatch& leaf, std::vector<ScalarField> raw);

// Default test span: sin/cos of the first modes_per_axis multiples of each
// grid coordinate, interior axes windowed to compact support.
ZeroMeanBasis fourier_basis(const LeafPatch& leaf, int modes_per_axis);

struct StabilityReport {
  int r = 0;
  std::string leaf;      // label supplied by the caller, empty in library use
  bool surveyed = false; // criterion_signs ran; the sign fields below are live
  bool tense = false;
  bool hypothesis_ok = true;  // ambient class licenses this order
  OperatorSign newton_sign = OperatorSign::indefinite;
  RateSign rate_sign = RateSign::mixed;
  bool criterion_met = false;
  Eigen::VectorXd gram_spectrum;  // ascending; empty until gram_stability
  int subspace_dim = 0;
  Verdict verdict = Verdict::inconclusive;
};

// Pointwise sign survey of T_r and of the rate of S_{r+1} along the normal.
// The sufficient condition for stability needs matched signs: T_r >= 0 with a
// nonincreasing S_{r+1}, or both reversed. The ambient gate (r = 1 wants
// Einstein, r >= 2 a space form) is reported through hypothesis_ok, not
// thrown, so perturbed controls still get surveyed.
StabilityReport criterion_signs(const OperatorContext& ctx, const FoliationSlice& slice);

// Gram matrix of the quadratic form over the basis, eigen-decomposed. A
// single-signed spectrum certifies no sign change inside the tested span;
// mixed signs beyond kGramSignRel * |Q| certify instability outright.
StabilityReport gram_stability(const OperatorContext& ctx, const ZeroMeanBasis& basis);

// Both assemblies of the quadratic form: the integral of
// <T_r(grad f + f a), grad f + f a> - f^2 N(S_{r+1}) against -f J_r f, with a
// the ambient acceleration of the normal. residual is their gap, scale the
// larger magnitude involved (floored at 1).
struct IdentityResidual {
  double residual = 0.0;
  double scale = 1.0;
  double quadratic_form = 0.0;  // the -f J_r f assembly
};

IdentityResidual quadratic_form_identity(const OperatorContext& ctx, const FoliationSlice& slice,
                                         const ScalarField& f);

// Integral of the area-type integrand F_r over the leaf. The recursion mixes
// in the space-form constant, so the context overload insists on that class.
double ar_functional(const LeafPatch& leaf, int r, double c);
double ar_functional(const OperatorContext& ctx);

// Naive second difference of ar_functional along the straight normal graph of
// f, against (r+1) I_r(f,f). No contract: the straight graph is not the
// constrained variation behind that formula, so curvature-weighted extra
// terms survive whenever the leaf is not r-minimal (a flat leaf agrees, the
// round sphere does not). Reported so configs can see the gap.
struct SecondVariationProbe {
  double second_difference = 0.0;
  double quadratic_form = 0.0;
  double gap = 0.0;  // relative to max(1, |quadratic_form|)
};

SecondVariationProbe second_variation_probe(const OperatorContext& ctx, const ScalarField& f,
                                            double step = 1e-3);

std::string describe(const StabilityReport& report);

}  // namespace foliage
