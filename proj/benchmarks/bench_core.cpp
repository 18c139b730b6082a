#include <benchmark/benchmark.h>

#include <vector>

#include "cltcert/constants.hpp"
#include "cltcert/distributions.hpp"
#include "cltcert/kolmogorov.hpp"
#include "cltcert/stein.hpp"
#include "cltcert/triangular_array.hpp"

using namespace cltcert;

static void BM_NormalCdf(benchmark::State& state) {
  double x = -6.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_cdf(x));
    x = x > 6.0 ? -6.0 : x + 1e-3;
  }
}
BENCHMARK(BM_NormalCdf);

// Exact row sum for the alpha = 1/2 family; atoms grow quickly with n.
static void BM_RowSumExact(benchmark::State& state) {
  const Row row = build_row(ArraySpec::example_alpha(0.5), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(row_sum_exact(row).size());
}
BENCHMARK(BM_RowSumExact)->Arg(6)->Arg(9)->Arg(11)->Unit(benchmark::kMillisecond);

static void BM_CoinSquaring(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> ns{n};
  const auto spec = ArraySpec::scaled_iid(DiscreteDistribution::symmetric_pair(1.0), ns);
  const Row row = build_row(spec, n);
  for (auto _ : state) benchmark::DoNotOptimize(k_distance(row_sum_exact(row)).value);
}
BENCHMARK(BM_CoinSquaring)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_RowSamples(benchmark::State& state) {
  const Row row = build_row(ArraySpec::example_alpha(0.5), 1000);
  for (auto _ : state) benchmark::DoNotOptimize(row_sum_samples(row, 100000, 1).size());
}
BENCHMARK(BM_RowSamples)->Unit(benchmark::kMillisecond);

static void BM_SteinEval(benchmark::State& state) {
  const auto h = TestFunction::smoothstep(0.3, 0.5);
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stein_eval(h, x));
    x = x > 3.0 ? -3.0 : x + 0.01;
  }
}
BENCHMARK(BM_SteinEval)->Unit(benchmark::kMicrosecond);

static void BM_ConstantsPipeline(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(constants_pipeline(1.7).c_psi);
}
BENCHMARK(BM_ConstantsPipeline)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
