#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "foliage/hypersurface.hpp"
#include "foliage/leafcalc.hpp"
#include "foliage/stability.hpp"
#include "foliage/symcurv.hpp"

using namespace foliage;

namespace {

const double kPi = std::acos(-1.0);

AmbientChart euclid3() {
  return make_euclidean({{-4.0, 4.0, false}, {-4.0, 4.0, false}, {-4.0, 4.0, false}});
}

LeafPatch sphere_leaf(const AmbientChart& chart, int m) {
  ImmersionSpec imm;
  imm.name = "sphere";
  imm.map = [](const Eigen::VectorXd& u) {
    Eigen::VectorXd p(3);
    p << std::sin(u(0)) * std::cos(u(1)), std::sin(u(0)) * std::sin(u(1)), std::cos(u(0));
    return p;
  };
  imm.normal_seed = [](const Eigen::VectorXd& p) { return Eigen::VectorXd(-p); };
  AxisSpec theta{AxisKind::polar, m, 0.0, 2.0 * kPi, true, 1.0};
  AxisSpec phi{AxisKind::periodic, m, 0.0, 2.0 * kPi, true, 1.0};
  return build_leaf(chart, imm, Grid({theta, phi}));
}

Eigen::VectorXd random_kappa(int n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  Eigen::VectorXd kappa(n);
  for (int i = 0; i < n; ++i) kappa(i) = entry(rng);
  return kappa;
}

void bm_newton_recursion(benchmark::State& state) {
  Eigen::MatrixXd a = random_kappa(int(state.range(0))).asDiagonal();
  for (auto _ : state) benchmark::DoNotOptimize(newton_by_recursion(a));
}
BENCHMARK(bm_newton_recursion)->Arg(4)->Arg(8);

void bm_curvature_fields(benchmark::State& state) {
  auto chart = euclid3();
  auto leaf = sphere_leaf(chart, int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curvature_fields(leaf, 1));
}
BENCHMARK(bm_curvature_fields)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void bm_operator_apply(benchmark::State& state) {
  auto chart = euclid3();
  auto leaf = sphere_leaf(chart, int(state.range(0)));
  auto ctx = make_context(chart, leaf, 1);
  auto f = make_field(leaf, [](const Eigen::VectorXd& u) {
    return std::cos(u(0)) * std::cos(u(0)) - 1.0 / 3.0;
  });
  for (auto _ : state) benchmark::DoNotOptimize(j_r(ctx, f));
}
BENCHMARK(bm_operator_apply)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void bm_gram_assembly(benchmark::State& state) {
  auto chart = euclid3();
  auto leaf = sphere_leaf(chart, 32);
  auto ctx = make_context(chart, leaf, 1);
  auto basis = fourier_basis(leaf, int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gram_stability(ctx, basis));
}
BENCHMARK(bm_gram_assembly)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
