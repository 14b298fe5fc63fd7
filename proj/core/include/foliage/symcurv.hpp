#pragma once

#include <Eigen/Dense>
#include <vector>

namespace foliage {

// Pointwise curvature algebra: elementary symmetric functions of the principal
// curvatures, the higher-order mean curvatures built from them, and the Newton
// transformations of the shape operator.

inline constexpr double kShapeSymmetryTol = 1e-12;   // absolute, entries O(1)
inline constexpr double kSpectrumAgreeRel = 1e-10;
inline constexpr double kCayleyHamiltonTol = 1e-9;   // times max(1,|A|)^n
inline constexpr double kCharPolyTol = 1e-8;         // times (1+|A|)^n
inline constexpr double kTraceIdentityRel = 1e-10;

struct CurvatureVector {
  Eigen::VectorXd kappa;
  int n() const { return int(kappa.size()); }
};

// S_0..S_n and their binomial normalizations H_r = S_r / C(n,r)
struct MeanCurvatures {
  Eigen::VectorXd s;
  Eigen::VectorXd h;
};

// Eigen-data of the r-th Newton transformation on a diagonalizing frame:
// mu(i) is the eigenvalue seen by the i-th principal direction, s holds
// S_0..S_n of the underlying curvature vector.
struct NewtonSpectrum {
  int r = 0;
  Eigen::VectorXd mu;
  Eigen::VectorXd s;
};

struct TraceTriple {
  double t = 0.0;    // trace of T_r
  double at = 0.0;   // trace of A T_r
  double a2t = 0.0;  // trace of A^2 T_r
};

// sigma_r(x) by coefficient extraction from prod(t + x_i); sigma_0 = 1 and
// sigma_r = 0 past the length of x.
double sigma(int r, const Eigen::VectorXd& x);
Eigen::VectorXd sigma_all(const Eigen::VectorXd& x);  // sigma_0..sigma_n

MeanCurvatures mean_curvatures(const CurvatureVector& kv);

// T_0..T_n from T_0 = I, T_r = S_r I - A T_{r-1}, with S_r read off the
// partial traces along the way. The top element vanishes identically.
// Throws NonSymmetricInput when the input is not symmetric.
std::vector<Eigen::MatrixXd> newton_by_recursion(const Eigen::MatrixXd& a);

// mu(i) = sigma_r of the curvature vector with entry i removed.
NewtonSpectrum newton_by_spectrum(const CurvatureVector& kv, int r);

// The three traces (Tr T_r, Tr A T_r, Tr A^2 T_r) as spectral sums. Verifies
// them against their closed forms in S_r and the binomial weight identity;
// a disagreement raises NumericalContractViolation.
TraceTriple trace_identities(const CurvatureVector& kv, int r);

// Max mismatch between det(tI - A) and the alternating S_r polynomial over
// n+1 sample points. Throws NonSymmetricInput.
double char_poly_check(const Eigen::MatrixXd& a);

// Area integrand sequence F_0 = 1, F_1 = S_1,
// F_r = S_r + c (n - r + 1) / (r - 1) F_{r-2}, returned for r = 0..n-1.
// The second overload extends the recursion to rmax.
std::vector<double> f_r_sequence(const Eigen::VectorXd& s, double c, int n);
std::vector<double> f_r_sequence(const Eigen::VectorXd& s, double c, int n, int rmax);

}  // namespace foliage
