#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace foliage {

// Axis flavors for tensor-product parameter grids.
//
//  periodic: uniform nodes on [lo,hi), wrap-around neighbours.
//  polar:    the double-cover latitude trick for sphere-like angles. Uniform
//            half-offset nodes on [0,2pi) so the poles are never sampled, and
//            quadrature weights that integrate smooth periodic functions
//            against the |sin| density exactly up to the grid bandwidth
//            (including the 1/2 for covering the surface twice).
//  interior: half-offset uniform nodes on (lo,hi), midpoint weights. Test
//            fields must be compactly supported here; geometry fields get
//            one-sided stencils at the edges.
enum class AxisKind { periodic, polar, interior };

enum class DerivMode { fd4, spectral };

// Geometry fields (metric, normals, curvatures) are defined by the immersion
// and generally do not wrap across interior-axis edges. Test fields are
// compactly supported in interior axes, so their periodic extension is smooth
// and wrap-around stencils stay valid.
enum class FieldKind { geometry, test };

struct AxisSpec {
  AxisKind kind = AxisKind::periodic;
  int count = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool offset = false;  // half-cell shift; implied for polar and interior
  double fold = 1.0;    // weight scale when the parametrization covers the surface multiple times
};

class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<AxisSpec> axes);

  int dim() const { return int(axes_.size()); }
  std::size_t size() const { return size_; }
  const AxisSpec& spec(int a) const { return axes_[std::size_t(a)]; }
  const Eigen::VectorXd& nodes(int a) const { return nodes_[std::size_t(a)]; }
  const Eigen::VectorXd& axis_weights(int a) const { return weights_[std::size_t(a)]; }
  double step(int a) const { return h_[std::size_t(a)]; }
  bool wraps(int a) const { return axes_[std::size_t(a)].kind != AxisKind::interior; }

  double weight(std::size_t node) const;
  Eigen::VectorXd point(std::size_t node) const;
  double coordinate(std::size_t node, int a) const;
  std::size_t index(const std::vector<int>& mi) const;
  void multi_index(std::size_t node, std::vector<int>& mi) const;

  std::vector<double> d1(const std::vector<double>& f, int axis, DerivMode mode,
                         FieldKind kind) const;
  std::vector<double> d2(const std::vector<double>& f, int axis, DerivMode mode,
                         FieldKind kind) const;

 private:
  enum class LineOp { d1, d2 };
  std::vector<double> apply(const std::vector<double>& f, int axis, DerivMode mode,
                            FieldKind kind, LineOp op) const;

  std::vector<AxisSpec> axes_;
  std::vector<Eigen::VectorXd> nodes_;
  std::vector<Eigen::VectorXd> weights_;
  std::vector<double> h_;
  std::vector<std::size_t> strides_;
  std::vector<Eigen::MatrixXd> spectral_d1_;       // per axis, uniform spacing
  std::vector<Eigen::MatrixXd> edge_w1_, edge_w2_; // one-sided closures, interior axes
  std::size_t size_ = 0;
};

}  // namespace foliage
