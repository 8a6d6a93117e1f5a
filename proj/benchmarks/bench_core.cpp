#include <benchmark/benchmark.h>

#include "qdmag/optimizer.hpp"

using namespace qdmag;

namespace {

const DotModel& model() {
  static const DotModel m = make_dot_model(Material{}, AlphaMode::variance_matched, 49);
  return m;
}

const GaussianPrior kPrior(7e-3, 4e-3);

}  // namespace

static void BM_ChannelCoefficients(benchmark::State& state) {
  const BathSpec bath = bath_weights(static_cast<int>(state.range(0)), HalfInt{1}, model().bath.alpha);
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(coefficients_AE(bath, 7e-3, t, -0.44));
    t += 1e-3;
  }
}
BENCHMARK(BM_ChannelCoefficients)->Arg(10)->Arg(49)->Arg(200);

static void BM_ChannelEvaluator(benchmark::State& state) {
  const ChannelEvaluator eval(model().bath, 7e-3, model().g_factor);
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval.at(t));
    t += 1e-3;
  }
}
BENCHMARK(BM_ChannelEvaluator);

static void BM_ApplyProductChannel(benchmark::State& state) {
  const Eigen::Index d = Eigen::Index{1} << state.range(0);
  CMatrix m = CMatrix::Identity(d, d) / static_cast<double>(d);
  for (auto _ : state) {
    apply_product_channel(m, 0.9, Complex(0.5, 0.1));
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_ApplyProductChannel)->DenseRange(1, 5);

static void BM_MixtureApply(benchmark::State& state) {
  const int dots = static_cast<int>(state.range(0));
  const QuadratureGrid grid = prior_quadrature(kPrior, 64, 0.0);
  std::vector<ChannelCoeffs> channels;
  for (double b : grid.nodes) channels.push_back(model().coefficients(b, 10.0));
  const ProductChannelMixture mix(grid.weights, channels, dots);
  const Eigen::Index d = Eigen::Index{1} << dots;
  const CMatrix m = CMatrix::Constant(d, d, 1.0 / static_cast<double>(d));
  for (auto _ : state) benchmark::DoNotOptimize(mix.apply(m));
}
BENCHMARK(BM_MixtureApply)->DenseRange(1, 5);

static void BM_BayesProblemSetup(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(BayesProblem(model(), kPrior, 64, t, 4));
}
BENCHMARK(BM_BayesProblemSetup)->Arg(5)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_OptimizerIteration(benchmark::State& state) {
  const int dots = static_cast<int>(state.range(0));
  const BayesProblem problem(model(), kPrior, 64, 6.0, dots);
  std::mt19937_64 rng(1);
  PureState psi = haar_random_state(Eigen::Index{1} << dots, rng);
  for (auto _ : state) {
    psi = iterate_once(psi, problem);
    benchmark::DoNotOptimize(psi);
  }
}
BENCHMARK(BM_OptimizerIteration)->DenseRange(1, 5);

static void BM_OptimizeState(benchmark::State& state) {
  const int dots = static_cast<int>(state.range(0));
  const BayesProblem problem(model(), kPrior, 64, 6.0, dots);
  OptimizerConfig cfg;
  cfg.restarts = 4;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_state(dots, problem, cfg));
}
BENCHMARK(BM_OptimizeState)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
