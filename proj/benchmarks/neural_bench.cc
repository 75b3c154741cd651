#include <benchmark/benchmark.h>

#include "absa/neural.h"
#include "absa/random.h"
#include "absa/tagger.h"

namespace {

// The tagger's first layer: a 5-token window of 306-wide rows.
void BM_ConvWindow(benchmark::State& state) {
  absa::Rng rng(3);
  absa::ConvLayer layer(static_cast<int>(state.range(0)), 2, 306);
  for (double& v : layer.weights.data()) v = rng.uniform(-0.01, 0.01);
  absa::Matrix x(5, 306);
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(absa::conv1d_grid(x, layer));
}
BENCHMARK(BM_ConvWindow)->Arg(25)->Arg(100);

void BM_MaxPoolRows(benchmark::State& state) {
  absa::Rng rng(3);
  absa::Matrix g(static_cast<std::size_t>(state.range(0)), 100);
  for (double& v : g.data()) v = rng.uniform(-1, 1);
  std::vector<int> argmax;
  for (auto _ : state) benchmark::DoNotOptimize(absa::max_pool_rows(g, 2, 1, &argmax));
}
BENCHMARK(BM_MaxPoolRows)->Arg(4)->Arg(64);

// One token scored by the default-size network, inference only.
void BM_TokenScores(benchmark::State& state) {
  absa::TaggerConfig cfg;
  cfg.embedding_dim = static_cast<int>(state.range(0));
  const absa::TaggerModel model(cfg);
  const absa::EmbeddingTable table(cfg.embedding_dim, absa::UnkPolicy::kSeededHash, 1);
  absa::Sentence s;
  for (const char* w : {"the", "battery", "life", "is", "short"}) {
    absa::Token t;
    t.surface = w;
    s.tokens.push_back(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(model.token_scores(s, table));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.tokens.size()));
}
BENCHMARK(BM_TokenScores)->Arg(50)->Arg(300);

}  // namespace
