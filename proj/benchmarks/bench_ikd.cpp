#include <benchmark/benchmark.h>

#include "ikd/ikd.hpp"

using namespace ikd;

namespace {

SyntheticDataset gp_dataset(Index T, Index N) {
  GeneratorParams p = GeneratorParams::defaults_for(Mapping::kGp);
  p.T = T;
  p.N = N;
  return generate_dataset(p, 1);
}

const KernelSpec kSe{SquaredExponential{}, 1.0};

}  // namespace

static void BM_SampleCovariance(benchmark::State& state) {
  const auto ds = gp_dataset(state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(sample_covariance(ds.X));
}
BENCHMARK(BM_SampleCovariance)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_IkdNone(benchmark::State& state) {
  const auto ds = gp_dataset(state.range(0), 500);
  for (auto _ : state) {
    benchmark::DoNotOptimize(inverse_kernel_decomposition(ds.X, kSe, 3, {Strategy::kNone}));
  }
}
BENCHMARK(BM_IkdNone)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_GeodesicCompletion(benchmark::State& state) {
  const auto ds = gp_dataset(state.range(0), 500);
  const auto cov = sample_covariance(ds.X);
  const double s0 = 0.1 * cov.sigma2_hat;
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_completion(cov, s0));
}
BENCHMARK(BM_GeodesicCompletion)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Blockwise(benchmark::State& state) {
  const auto ds = gp_dataset(state.range(0), 500);
  const auto cov = sample_covariance(ds.X);
  const double s0 = 0.1 * cov.sigma2_hat;
  for (auto _ : state) benchmark::DoNotOptimize(blockwise_ikd(cov, kSe, 3, s0));
}
BENCHMARK(BM_Blockwise)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_MaternInverse(benchmark::State& state) {
  const double nu = static_cast<double>(state.range(0)) / 10.0;
  const KernelSpec spec{Matern{nu}, 1.0};
  double k = 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_inverse(spec, k));
    k = k > 1e-6 ? k * 0.9 : 0.7;
  }
}
BENCHMARK(BM_MaternInverse)->Arg(5)->Arg(15)->Arg(25)->Arg(12);

static void BM_Pca(benchmark::State& state) {
  const auto ds = gp_dataset(state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(pca_baseline(ds.X, 3));
}
BENCHMARK(BM_Pca)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
