#include "foliage/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace foliage {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * double(n - k + i) / double(i);
  return std::round(c);
}

double richardson_d1(const std::function<double(double)>& f, double t, double h) {
  auto central = [&](double step) { return (f(t + step) - f(t - step)) / (2.0 * step); };
  double d1 = central(h);
  double d2 = central(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

double richardson_d2(const std::function<double(double)>& f, double t, double h) {
  double fc = f(t);
  auto central = [&](double step) { return (f(t + step) - 2.0 * fc + f(t - step)) / (step * step); };
  double d1 = central(h);
  double d2 = central(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

Eigen::MatrixXd fd_weights(double x0, const Eigen::VectorXd& nodes, int order) {
  const int nn = int(nodes.size());
  if (nn < order + 1) throw std::invalid_argument("fd_weights: not enough nodes");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nn, order + 1);
  double c1 = 1.0;
  double c4 = nodes(0) - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < nn; ++i) {
    int mn = std::min(i, order);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes(i) - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes(i) - nodes(j);
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.transpose();  // (order+1) x nn
}

namespace {

// 20-point Gauss-Legendre nodes/weights on [-1,1]
constexpr int kGl = 20;
const double kGlX[kGl] = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
    -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154195,
    -0.2277858511416451, -0.0765265211334973,  0.0765265211334973,  0.2277858511416451,
     0.3737060887154195,  0.5108670019508271,  0.6360536807265150,  0.7463319064601508,
     0.8391169718222188,  0.9122344282513259,  0.9639719272779138,  0.9931285991850949};
const double kGlW[kGl] = {
    0.0176140071391521, 0.0406014298003869, 0.0626720483341091, 0.0832767415767048,
    0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183820,
    0.1491729864726037, 0.1527533871307258, 0.1527533871307258, 0.1491729864726037,
    0.1420961093183820, 0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869, 0.0176140071391521};

}  // namespace

double integrate_gl(const std::function<double(double)>& f, double a, double b) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  int panels = std::max(1, int(std::ceil(b - a)));
  double total = 0.0;
  double len = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * len;
    double mid = lo + 0.5 * len;
    double half = 0.5 * len;
    double s = 0.0;
    for (int q = 0; q < kGl; ++q) s += kGlW[q] * f(mid + half * kGlX[q]);
    total += s * half;
  }
  return sign * total;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk) {
  unsigned threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("FOLIAGE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) threads = unsigned(v);
  }
  if (threads <= 1 || n < 256) {
    chunk(0, n);
    return;
  }
  threads = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::size_t per = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t lo = t * per;
    std::size_t hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace foliage
