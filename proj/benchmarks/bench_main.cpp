#include <random>

#include <benchmark/benchmark.h>

#include "wildgen/baselines.hpp"
#include "wildgen/latent_gmm.hpp"
#include "wildgen/metrics.hpp"
#include "wildgen/postprocess.hpp"
#include "wildgen/synthgen.hpp"
#include "wildgen/vae.hpp"

namespace {

using namespace wildgen;

const TrajectorySet& corpus() {
  static const TrajectorySet set = generate_corpus(SynthConfig{});
  return set;
}

void BM_VaeEpoch(benchmark::State& state) {
  const Normalized n = normalize(corpus());
  const VaeParams params = init_params(Architecture::standard(), 1);
  Rng rng(2);
  for (auto _ : state) {
    auto g = backward(params, n.matrix.values, 1e-5, rng);
    benchmark::DoNotOptimize(g.loss.total);
  }
  state.SetItemsProcessed(state.iterations() * n.matrix.rows());
}
BENCHMARK(BM_VaeEpoch)->Unit(benchmark::kMillisecond);

void BM_DecodeBatch(benchmark::State& state) {
  const VaeParams params = init_params(Architecture::standard(), 1);
  Rng rng(3);
  Eigen::MatrixXd z(3, state.range(0));
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(decode_batch(params, z).sum());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecodeBatch)->Arg(1)->Arg(64);

void BM_GmmFit(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd codes(60, 3);
  for (Eigen::Index i = 0; i < codes.size(); ++i) codes.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fit_gmm(codes, {.k = 15}).fit_log_likelihood);
}
BENCHMARK(BM_GmmFit)->Unit(benchmark::kMillisecond);

void BM_SmoothTrajectory(benchmark::State& state) {
  const SavgolSpec spec{21, 3};
  for (auto _ : state) benchmark::DoNotOptimize(smooth_trajectory(corpus()[0], spec).points.data());
}
BENCHMARK(BM_SmoothTrajectory);

void BM_HullContainment(benchmark::State& state) {
  const ConvexRegion hull = convex_hull(corpus().pooled_points());
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(contains(hull, corpus()[i++ % corpus().size()]));
}
BENCHMARK(BM_HullContainment);

void BM_Hausdorff(benchmark::State& state) {
  const auto& a = corpus()[0].points;
  const auto& b = corpus()[1].points;
  for (auto _ : state) benchmark::DoNotOptimize(hausdorff(a, b));
}
BENCHMARK(BM_Hausdorff);

void BM_EvaluateFixedK(benchmark::State& state) {
  const SynthConfig other{.seed = 99};
  const TrajectorySet gen = generate_corpus(other);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(corpus(), gen, {.k = 13}).pearson_r);
}
BENCHMARK(BM_EvaluateFixedK)->Unit(benchmark::kMillisecond);

void BM_HgprFit(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_hgpr(corpus(), 0.5, 5).lon.log_marginal_likelihood);
}
BENCHMARK(BM_HgprFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
