#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wsfe/encoder.hpp"
#include "wsfe/ot.hpp"
#include "wsfe/synthetic.hpp"

namespace {

using namespace wsfe;

// args: M, S. d = 64, L = 3.
void BM_EncodeAll(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto s = static_cast<std::size_t>(state.range(1));
  const std::size_t dim = 64, depth = 3;
  const auto features = synthetic::gaussian_features(m, depth + 1, dim, 1);
  const auto proj = encoder::sample_projections(s, dim, 2);
  const auto ref = encoder::make_reference(depth, dim, 3, 1.0);
  for (auto _ : state) {
    auto enc = encoder::encode_all(features, ref, proj, encoder::Layout::concat);
    benchmark::DoNotOptimize(enc.values.data().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}
BENCHMARK(BM_EncodeAll)
    ->Args({1000, 64})
    ->Args({10000, 64})
    ->Args({1000, 128})
    ->Unit(benchmark::kMillisecond);

void BM_W2_1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = normal(rng);
  for (auto& x : b) x = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ot::w2_1d(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W2_1d)->RangeMultiplier(4)->Range(4, 4096)->Complexity(benchmark::oNLogN);

void BM_McSw2(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto f = synthetic::gaussian_features(2, 4, 64, 5);
  ot::PointSet p(4, 64), q(4, 64);
  for (std::size_t l = 0; l < 4; ++l) {
    std::ranges::copy(f.layer(0, l), p.row(l).begin());
    std::ranges::copy(f.layer(1, l), q.row(l).begin());
  }
  const auto proj = encoder::sample_projections(s, 64, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ot::mc_sw2(p, q, proj));
}
BENCHMARK(BM_McSw2)->Arg(4)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
