#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "foliage/ambient.hpp"
#include "foliage/grid.hpp"

namespace foliage {

inline constexpr double kUnitNormalTol = 1e-10;
inline constexpr double kTangencyTol = 1e-8;
inline constexpr double kSecondFormSymTol = 1e-8;
inline constexpr double kConstancyRel = 1e-8;   // S_{r+1} constancy flag
inline constexpr double kOperatorSignTol = 1e-10;
inline constexpr double kNormalRateStep = 1e-5; // d/dt of S_{r+1} along the normal

// Closed-form parametrization of one leaf. normal_seed picks the side of the
// unit normal; it only needs a positive ambient inner product with the true
// normal. jacobian (columns = coordinate tangents) is optional and covers
// parametrizations whose coordinate functions do not wrap with the grid, such
// as a linear coordinate on a periodic box.
struct ImmersionSpec {
  std::string name;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> normal_seed;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

// One leaf sampled on a parameter grid. Shape operator sign convention:
// A = -(ambient gradient of N) restricted to the tangent space, so the unit
// sphere with inward normal has kappa = +1.
struct LeafPatch {
  int n = 0;
  int ambient_dim = 0;
  Grid grid;
  DerivMode mode = DerivMode::spectral;
  Eigen::MatrixXd points;   // node rows
  Eigen::MatrixXd normal;   // node rows, unit in the ambient metric
  std::vector<Eigen::MatrixXd> tangents;        // per axis, node rows
  std::vector<Eigen::MatrixXd> induced_metric;  // per node
  std::vector<Eigen::MatrixXd> chol;            // lower factor of the induced metric
  std::vector<Eigen::MatrixXd> shape;           // mixed A^i_j
  std::vector<Eigen::MatrixXd> shape_sym;       // L^{-1} b L^{-T}, same spectrum
  Eigen::MatrixXd kappa;                        // node rows, ascending
  std::vector<Tensor3> christoffels_leaf;
  Eigen::VectorXd volume_weights;

  std::size_t size() const { return grid.size(); }
};

LeafPatch build_leaf(const AmbientChart& chart, const ImmersionSpec& immersion,
                     const Grid& grid, DerivMode mode = DerivMode::spectral);

// Per-node symmetric-function data of the shape operator. mu rows pair with
// the ascending kappa rows of the leaf. tense reports whether S_{r+1} is
// constant across the leaf within kConstancyRel * (1 + |mean|).
struct CurvatureFields {
  int r = 0;
  Eigen::VectorXd s_r;
  Eigen::VectorXd s_next;
  Eigen::VectorXd h_r;
  std::vector<Eigen::MatrixXd> newton;      // mixed transformation per node
  std::vector<Eigen::MatrixXd> newton_sym;  // frame representation per node
  Eigen::MatrixXd mu;
  bool tense = false;
  double tense_deviation = 0.0;
};

CurvatureFields curvature_fields(const LeafPatch& leaf, int r);

// columns are ambient vectors forming a tangent basis at the node,
// orthonormal in the ambient metric; kth column pairs with the kth
// cholesky-frame component
Eigen::MatrixXd orthonormal_tangent_frame(const LeafPatch& leaf, std::size_t node);

enum class OperatorSign { positive_semidefinite, negative_semidefinite, indefinite };

// principal curvatures of the slice t = const under the N = +d/dt orientation
Eigen::VectorXd warped_kappa(const WarpedSpec& spec, double t);

struct NormalData {
  double ds_next = 0.0;  // rate of S_{r+1} along the unit normal
  OperatorSign sign = OperatorSign::indefinite;
  Eigen::VectorXd mu;
  Eigen::VectorXd nabla_n_n;  // ambient acceleration of the normal field
};

NormalData foliation_normal_data(const WarpedSpec& spec, int r, double t);

// A leaf of the warped family together with the normal-direction data every
// node sees: the rate of S_{r+1} and the acceleration of N (zero here, since
// d/dt is geodesic for these metrics).
struct FoliationSlice {
  double t = 0.0;
  int r = 0;
  LeafPatch leaf;
  Eigen::VectorXd ds_next;    // per node
  Eigen::MatrixXd nabla_n_n;  // per node rows
};

FoliationSlice foliation_slice(const WarpedSpec& spec, const Grid& leaf_grid, int r, double t,
                               DerivMode mode = DerivMode::spectral);

}  // namespace foliage
