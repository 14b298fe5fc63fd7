#include "foliage/grid.hpp"

#include <cmath>

#include "foliage/errors.hpp"
#include "foliage/numerics.hpp"

namespace foliage {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fourier-exact quadrature weights for int_0^{2pi} g(x)|sin x| dx on the
// half-offset grid x_k = (k+1/2)h. The moments of |sin| are c_0 = 4 and
// c_m = 4/(1-m^2) for even m, zero for odd m.
Eigen::VectorXd dfs_weights(int m) {
  Eigen::VectorXd w(m);
  double h = kTwoPi / m;
  for (int k = 0; k < m; ++k) {
    double x = (k + 0.5) * h;
    double acc = 4.0;
    for (int mu = 2; mu < m / 2; mu += 2) acc += 2.0 * (4.0 / (1.0 - double(mu) * mu)) * std::cos(mu * x);
    w(k) = acc / m;
  }
  return w;
}

Eigen::MatrixXd spectral_matrix(int m, double period) {
  if (m % 2 != 0) return Eigen::MatrixXd();  // spectral mode unavailable on odd counts
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  double scale = kTwoPi / period;
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      if (j == k) continue;
      int diff = j - k;
      double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      d(j, k) = scale * 0.5 * sign / std::tan(M_PI * double(diff) / m);
    }
  return d;
}

}  // namespace

Grid::Grid(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidSpec("grid needs at least one axis");
  size_ = 1;
  for (AxisSpec& ax : axes_) {
    if (ax.count < 8) throw InvalidSpec("grid axis needs at least 8 nodes");
    if (ax.kind == AxisKind::polar) {
      if (std::abs(ax.lo) > 1e-12 || std::abs(ax.hi - kTwoPi) > 1e-12)
        throw InvalidSpec("polar axis must span [0, 2pi)");
      ax.offset = true;
    }
    if (ax.kind == AxisKind::interior) ax.offset = true;
    if (!(ax.hi > ax.lo)) throw InvalidSpec("grid axis has empty interval");
    size_ *= std::size_t(ax.count);
  }

  strides_.resize(axes_.size());
  std::size_t stride = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    strides_[a] = stride;
    stride *= std::size_t(axes_[a].count);
  }

  for (const AxisSpec& ax : axes_) {
    int m = ax.count;
    double h = (ax.hi - ax.lo) / m;
    h_.push_back(h);
    Eigen::VectorXd x(m), w(m);
    double shift = ax.offset ? 0.5 * h : 0.0;
    for (int k = 0; k < m; ++k) x(k) = ax.lo + shift + k * h;
    switch (ax.kind) {
      case AxisKind::periodic:
      case AxisKind::interior:
        w.setConstant(h * ax.fold);
        break;
      case AxisKind::polar: {
        Eigen::VectorXd dfs = dfs_weights(m);
        for (int k = 0; k < m; ++k) w(k) = 0.5 * ax.fold * dfs(k) / std::abs(std::sin(x(k)));
        break;
      }
    }
    nodes_.push_back(std::move(x));
    weights_.push_back(std::move(w));
    spectral_d1_.push_back(spectral_matrix(m, ax.hi - ax.lo));

    // 6-node one-sided closures for geometry fields on interior axes
    Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(2, 6), w2 = Eigen::MatrixXd::Zero(2, 6);
    if (ax.kind == AxisKind::interior && m >= 6) {
      Eigen::VectorXd stencil(6);
      for (int k = 0; k < 6; ++k) stencil(k) = k * h;
      for (int row = 0; row < 2; ++row) {
        Eigen::MatrixXd c = fd_weights(row * h, stencil, 2);
        w1.row(row) = c.row(1);
        w2.row(row) = c.row(2);
      }
    }
    edge_w1_.push_back(std::move(w1));
    edge_w2_.push_back(std::move(w2));
  }
}

double Grid::weight(std::size_t node) const {
  double w = 1.0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    int i = int((node / strides_[a]) % std::size_t(axes_[a].count));
    w *= weights_[a](i);
  }
  return w;
}

Eigen::VectorXd Grid::point(std::size_t node) const {
  Eigen::VectorXd p(dim());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    int i = int((node / strides_[a]) % std::size_t(axes_[a].count));
    p(int(a)) = nodes_[a](i);
  }
  return p;
}

double Grid::coordinate(std::size_t node, int a) const {
  int i = int((node / strides_[std::size_t(a)]) % std::size_t(axes_[std::size_t(a)].count));
  return nodes_[std::size_t(a)](i);
}

std::size_t Grid::index(const std::vector<int>& mi) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) idx += strides_[a] * std::size_t(mi[a]);
  return idx;
}

void Grid::multi_index(std::size_t node, std::vector<int>& mi) const {
  mi.resize(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a)
    mi[a] = int((node / strides_[a]) % std::size_t(axes_[a].count));
}

std::vector<double> Grid::d1(const std::vector<double>& f, int axis, DerivMode mode,
                             FieldKind kind) const {
  return apply(f, axis, mode, kind, LineOp::d1);
}

std::vector<double> Grid::d2(const std::vector<double>& f, int axis, DerivMode mode,
                             FieldKind kind) const {
  return apply(f, axis, mode, kind, LineOp::d2);
}

std::vector<double> Grid::apply(const std::vector<double>& f, int axis, DerivMode mode,
                                FieldKind kind, LineOp op) const {
  if (f.size() != size_) throw InvalidSpec("field length does not match grid");
  const std::size_t a = std::size_t(axis);
  const int m = axes_[a].count;
  const double h = h_[a];
  const std::size_t stride = strides_[a];
  const std::size_t block = stride * std::size_t(m);
  const std::size_t nblocks = size_ / block;

  // Interior axes wrap only for compactly supported test fields.
  const bool wrap = wraps(axis) || kind == FieldKind::test;
  const bool use_spectral = mode == DerivMode::spectral && wrap;
  if (use_spectral && spectral_d1_[a].size() == 0)
    throw InvalidSpec("spectral differentiation needs an even node count");

  std::vector<double> out(size_);
  Eigen::VectorXd buf(m), res(m);

  auto process_line = [&](std::size_t base) {
    for (int k = 0; k < m; ++k) buf(k) = f[base + std::size_t(k) * stride];

    if (use_spectral) {
      res.noalias() = spectral_d1_[a] * buf;
      if (op == LineOp::d2) {
        Eigen::VectorXd tmp = res;
        res.noalias() = spectral_d1_[a] * tmp;
      }
    } else if (wrap) {
      for (int k = 0; k < m; ++k) {
        auto at = [&](int j) { return buf(((j % m) + m) % m); };
        if (op == LineOp::d1)
          res(k) = (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2)) / (12.0 * h);
        else
          res(k) = (-at(k + 2) + 16.0 * at(k + 1) - 30.0 * at(k) + 16.0 * at(k - 1) - at(k - 2)) /
                   (12.0 * h * h);
      }
    } else {
      const Eigen::MatrixXd& edge = (op == LineOp::d1) ? edge_w1_[a] : edge_w2_[a];
      for (int k = 0; k < m; ++k) {
        if (k >= 2 && k <= m - 3) {
          if (op == LineOp::d1)
            res(k) = (-buf(k + 2) + 8.0 * buf(k + 1) - 8.0 * buf(k - 1) + buf(k - 2)) / (12.0 * h);
          else
            res(k) = (-buf(k + 2) + 16.0 * buf(k + 1) - 30.0 * buf(k) + 16.0 * buf(k - 1) -
                      buf(k - 2)) /
                     (12.0 * h * h);
        } else {
          bool left = k < 2;
          int row = left ? k : m - 1 - k;
          double acc = 0.0;
          for (int j = 0; j < 6; ++j) {
            int src = left ? j : m - 1 - j;
            acc += edge(row, j) * buf(src);
          }
          if (!left && op == LineOp::d1) acc = -acc;  // mirrored stencil flips odd derivatives
          res(k) = acc;
        }
      }
    }

    for (int k = 0; k < m; ++k) out[base + std::size_t(k) * stride] = res(k);
  };

  for (std::size_t ob = 0; ob < nblocks; ++ob)
    for (std::size_t in = 0; in < stride; ++in) process_line(ob * block + in);
  return out;
}

}  // namespace foliage
