#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "foliage/expr.hpp"

namespace foliage {

inline constexpr double kMetricEigenFloor = 1e-10;
inline constexpr double kBianchiTol = 1e-6;
inline constexpr double kClassifyTol = 1e-6;

struct DomainAxis {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;
};

struct Tensor3 {
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), v_(std::size_t(n) * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int a, int b, int c) { return v_[(std::size_t(a) * n_ + b) * n_ + c]; }
  double operator()(int a, int b, int c) const { return v_[(std::size_t(a) * n_ + b) * n_ + c]; }

 private:
  int n_ = 0;
  std::vector<double> v_;
};

struct Tensor4 {
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), v_(std::size_t(n) * n * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int a, int b, int c, int d) {
    return v_[((std::size_t(a) * n_ + b) * n_ + c) * n_ + d];
  }
  double operator()(int a, int b, int c, int d) const {
    return v_[((std::size_t(a) * n_ + b) * n_ + c) * n_ + d];
  }

 private:
  int n_ = 0;
  std::vector<double> v_;
};

// Curvature data at one point: riemann holds R^a_{bcd} with the first index
// raised; ricci is the (b,d) contraction over a = c.
struct CurvatureTensorSample {
  Eigen::VectorXd point;
  Tensor4 riemann;
  Eigen::MatrixXd ricci;
};

Tensor4 lower_riemann(const Eigen::MatrixXd& g, const Tensor4& mixed);

// A coordinate model of the ambient manifold. Derivative data comes from
// closed-form callables when provided and from fourth-order central
// differences of the metric otherwise; the two paths cross-validate each
// other in the tests.
// steps for the difference stencils, relative to each axis span
struct FdSteps {
  double metric_rel = 1e-3;       // metric -> christoffels
  double christoffel_rel = 5e-3;  // christoffels -> curvature
};

class AmbientChart {
 public:
  using MetricFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using ChristoffelFn = std::function<Tensor3(const Eigen::VectorXd&)>;
  using RiemannFn = std::function<Tensor4(const Eigen::VectorXd&)>;

  AmbientChart() = default;
  AmbientChart(std::string name, std::vector<DomainAxis> domain, MetricFn metric,
               ChristoffelFn christoffel = nullptr, RiemannFn riemann = nullptr,
               FdSteps steps = FdSteps());

  const std::string& name() const { return name_; }
  int dim() const { return int(domain_.size()); }
  const std::vector<DomainAxis>& domain() const { return domain_; }
  const FdSteps& steps() const { return steps_; }
  bool closed_form() const { return bool(christoffel_); }

  // same metric with the closed forms dropped, for cross-validation
  AmbientChart finite_difference_twin(FdSteps steps = FdSteps()) const;

  Eigen::MatrixXd metric(const Eigen::VectorXd& p) const;  // checked positive definite
  Tensor3 christoffels(const Eigen::VectorXd& p) const;
  CurvatureTensorSample riemann(const Eigen::VectorXd& p) const;

 private:
  void check_inside(const Eigen::VectorXd& p, double margin_rel) const;

  std::string name_;
  std::vector<DomainAxis> domain_;
  MetricFn metric_;
  ChristoffelFn christoffel_;
  RiemannFn riemann_;
  FdSteps steps_;
};

// Intrinsic model of the fiber used by isotropic warped charts.
struct LeafModel {
  std::string name;
  std::vector<DomainAxis> domain;
  AmbientChart::MetricFn metric;
  AmbientChart::ChristoffelFn christoffel;
  AmbientChart::RiemannFn riemann;
  int dim() const { return int(domain.size()); }
};

LeafModel flat_leaf(std::vector<DomainAxis> domain);
// coordinates (x_1..x_{d-1}, y) with metric delta / (beta y)^2, curvature -beta^2
LeafModel hyperbolic_halfspace_leaf(double beta, std::vector<DomainAxis> domain);

// One-parameter family of fiber metrics over a t-interval, either with an
// independent rate phi_i per coordinate (fiber metric e^{2 psi_i} dx_i^2 with
// psi_i' = -phi_i) or a single factor w(t)^2 scaling a fixed leaf metric.
struct WarpedSpec {
  enum class Kind { diagonal, isotropic };
  Kind kind = Kind::diagonal;
  std::vector<Expr> phi;               // diagonal
  std::vector<DomainAxis> leaf_domain; // diagonal
  Expr w;                              // isotropic
  LeafModel leaf;                      // isotropic
  double t_lo = 0.0;
  double t_hi = 0.0;
};

AmbientChart make_euclidean(std::vector<DomainAxis> domain);
AmbientChart make_warped(const WarpedSpec& spec);
// block metric of two half-planes with curvatures -beta1^2 and -beta2^2,
// coordinates (x1, y1, x2, y2)
AmbientChart make_product_halfplanes(double beta1, double beta2,
                                     std::vector<DomainAxis> domain);

struct Classification {
  enum class Kind { space_form, einstein, generic };
  Kind kind = Kind::generic;
  double c = 0.0;       // fitted sectional curvature when kind == space_form
  double lambda = 0.0;  // fitted ricci multiple when kind == einstein
  double space_form_residual = 0.0;
  double einstein_residual = 0.0;
};

// Least-squares fit of the constant-curvature and einstein models over the
// samples; the first model whose normalized residual clears kClassifyTol wins.
Classification classify(const AmbientChart& chart, const std::vector<Eigen::VectorXd>& samples);

// deterministic interior sample points, away from non-periodic edges
std::vector<Eigen::VectorXd> chart_samples(const AmbientChart& chart, int count, unsigned seed);

}  // namespace foliage
