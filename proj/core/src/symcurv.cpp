#include "foliage/symcurv.hpp"

#include <cmath>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"

namespace foliage {

namespace {

void validate(const CurvatureVector& kv) {
  if (kv.n() < 1) throw InvalidSpec("curvature vector must have at least one entry");
  if (!kv.kappa.allFinite()) throw InvalidSpec("curvature vector has non-finite entries");
}

void require_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw NonSymmetricInput("shape operator matrix is not square");
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kShapeSymmetryTol * scale)
    throw NonSymmetricInput("shape operator matrix is not symmetric");
}

}  // namespace

Eigen::VectorXd sigma_all(const Eigen::VectorXd& x) {
  const int n = int(x.size());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
  e(0) = 1.0;
  for (int i = 0; i < n; ++i)
    for (int r = i + 1; r >= 1; --r) e(r) += x(i) * e(r - 1);
  return e;
}

double sigma(int r, const Eigen::VectorXd& x) {
  if (r < 0) throw InvalidSpec("sigma order must be nonnegative");
  if (r == 0) return 1.0;
  if (r > int(x.size())) return 0.0;
  return sigma_all(x)(r);
}

MeanCurvatures mean_curvatures(const CurvatureVector& kv) {
  validate(kv);
  MeanCurvatures mc;
  mc.s = sigma_all(kv.kappa);
  const int n = kv.n();
  mc.h.resize(n + 1);
  for (int r = 0; r <= n; ++r) mc.h(r) = mc.s(r) / binomial(n, r);
  return mc;
}

std::vector<Eigen::MatrixXd> newton_by_recursion(const Eigen::MatrixXd& a) {
  require_symmetric(a);
  const int n = int(a.rows());
  std::vector<Eigen::MatrixXd> tower;
  tower.reserve(n + 1);
  tower.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int r = 1; r <= n; ++r) {
    Eigen::MatrixXd m = a * tower.back();
    double sr = m.trace() / r;
    tower.push_back(sr * Eigen::MatrixXd::Identity(n, n) - m);
  }
  return tower;
}

NewtonSpectrum newton_by_spectrum(const CurvatureVector& kv, int r) {
  validate(kv);
  const int n = kv.n();
  if (r < 0 || r > n) throw InvalidSpec("newton transformation order out of range");
  NewtonSpectrum sp;
  sp.r = r;
  sp.s = sigma_all(kv.kappa);
  sp.mu.resize(n);
  Eigen::VectorXd reduced(n - 1);
  for (int i = 0; i < n; ++i) {
    int w = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) reduced(w++) = kv.kappa(j);
    sp.mu(i) = sigma(r, reduced);
  }
  return sp;
}

TraceTriple trace_identities(const CurvatureVector& kv, int r) {
  NewtonSpectrum sp = newton_by_spectrum(kv, r);
  const int n = kv.n();
  TraceTriple out;
  for (int i = 0; i < n; ++i) {
    double k = kv.kappa(i), mu = sp.mu(i);
    out.t += mu;
    out.at += k * mu;
    out.a2t += k * k * mu;
  }

  auto s_at = [&](int j) { return j <= n ? sp.s(j) : 0.0; };
  double closed_t = (n - r) * s_at(r);
  double closed_at = (r + 1) * s_at(r + 1);
  double closed_a2t = s_at(1) * s_at(r + 1) - (r + 2) * s_at(r + 2);
  auto agree = [](double x, double y) {
    return std::abs(x - y) <= kTraceIdentityRel * (1.0 + std::max(std::abs(x), std::abs(y)));
  };
  if (!agree(out.t, closed_t) || !agree(out.at, closed_at) || !agree(out.a2t, closed_a2t))
    throw NumericalContractViolation("newton transformation traces disagree with closed forms");
  if (r < n && binomial(n, r) * (n - r) != binomial(n, r + 1) * (r + 1))
    throw NumericalContractViolation("binomial weight identity failed");
  return out;
}

double char_poly_check(const Eigen::MatrixXd& a) {
  require_symmetric(a);
  const int n = int(a.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  Eigen::VectorXd s = sigma_all(eig.eigenvalues());
  double worst = 0.0;
  for (int q = 0; q <= n; ++q) {
    double t = (q % 2 == 0) ? q / 2 : -(q + 1) / 2;  // 0, -1, 1, -2, 2, ...
    double lhs = (t * Eigen::MatrixXd::Identity(n, n) - a).determinant();
    double rhs = 0.0;
    for (int r = 0; r <= n; ++r) rhs += ((r % 2 == 0) ? 1.0 : -1.0) * s(r) * std::pow(t, n - r);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

std::vector<double> f_r_sequence(const Eigen::VectorXd& s, double c, int n, int rmax) {
  if (n < 1) throw InvalidSpec("dimension must be positive");
  if (rmax < 0 || rmax >= int(s.size()))
    throw InvalidSpec("area integrand sequence needs S_0..S_rmax");
  std::vector<double> f(rmax + 1);
  f[0] = 1.0;
  if (rmax >= 1) f[1] = s(1);
  for (int r = 2; r <= rmax; ++r) f[r] = s(r) + c * double(n - r + 1) / double(r - 1) * f[r - 2];
  return f;
}

std::vector<double> f_r_sequence(const Eigen::VectorXd& s, double c, int n) {
  return f_r_sequence(s, c, n, n - 1);
}

}  // namespace foliage
