#include <benchmark/benchmark.h>

#include "absa/cdbn.h"
#include "absa/random.h"

namespace {

void BM_Cd1Epoch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  absa::Rng rng(5);
  absa::RbmLayer layer(n, n);
  layer.init_uniform(rng, 0.1);
  std::vector<std::vector<double>> batch(10, std::vector<double>(n));
  for (auto& v : batch)
    for (double& x : v) x = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(absa::cd1_epoch(layer, batch, 0.01, rng));
}
BENCHMARK(BM_Cd1Epoch)->Arg(16)->Arg(256);

void BM_ConvCd1Epoch(benchmark::State& state) {
  absa::Rng rng(5);
  absa::ConvRbm rbm(8, 3, static_cast<int>(state.range(0)));
  for (double& w : rbm.kernels.data()) w = rng.uniform(-0.1, 0.1);
  std::vector<absa::Matrix> batch(4, absa::Matrix(30, static_cast<std::size_t>(state.range(0))));
  for (auto& m : batch)
    for (double& x : m.data()) x = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(absa::conv_cd1_epoch(rbm, batch, 0.01, rng));
}
BENCHMARK(BM_ConvCd1Epoch)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
