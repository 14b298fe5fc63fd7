#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace foliage {

// Pairwise (cascade) summation in fixed index order, so reductions are
// reproducible bit-for-bit regardless of how the values were produced.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

// Exact binomial coefficient; valid while the result fits a double exactly.
double binomial(int n, int k);

// Richardson-extrapolated central differences of f at t with base step h.
double richardson_d1(const std::function<double(double)>& f, double t, double h);
double richardson_d2(const std::function<double(double)>& f, double t, double h);

// Finite-difference weights for the m-th derivative at x0 on arbitrary nodes
// (Fornberg's recursion). Rows 0..m of the result hold weights for orders 0..m.
Eigen::MatrixXd fd_weights(double x0, const Eigen::VectorXd& nodes, int order);

// integral of f over [a,b] by composite Gauss-Legendre (20 points per panel,
// panels of length at most 1). Plenty for the analytic warping catalogs.
double integrate_gl(const std::function<double(double)>& f, double a, double b);

// Runs chunk(begin,end) over disjoint slices of [0,n). Honors FOLIAGE_THREADS;
// reductions must stay out of here, only per-index writes are safe.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk);

}  // namespace foliage
