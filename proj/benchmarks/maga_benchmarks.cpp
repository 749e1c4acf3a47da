#include <benchmark/benchmark.h>

#include "maga/corpus.hpp"
#include "maga/losses.hpp"
#include "maga/magaconv.hpp"
#include "maga/mask.hpp"
#include "maga/network.hpp"
#include "maga/ops.hpp"
#include "maga/params.hpp"
#include "maga/rng.hpp"

namespace maga {
namespace {

Tensor random_tensor(SplitMix64& rng, Shape shape, double lo, double hi) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

void BM_Conv2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  SplitMix64 rng(1);
  const Tensor x = random_tensor(rng, {n, n, c}, -1.0, 1.0);
  const Tensor k = random_tensor(rng, {3, 3, c, c}, -0.1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, {}, 1, Padding::same));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * c * c * 9));
}
BENCHMARK(BM_Conv2d)->Args({64, 8})->Args({32, 24})->Args({16, 48})->Args({8, 96});

void BM_MaskPyramid(benchmark::State& state) {
  SplitMix64 rng(2);
  std::vector<double> v(64 * 64);
  for (double& x : v) x = rng.uniform() < 0.9 ? 1.0 : 0.0;
  const Mask m = Mask::from_grid(Tensor({64, 64, 1}, v));
  for (auto _ : state) benchmark::DoNotOptimize(MaskPyramid::build(m));
}
BENCHMARK(BM_MaskPyramid);

void BM_MagaConvLayer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ParamStore ps;
  Initializer init(3);
  const MagaConvLayer layer(ps, init, "layer", 24, 24, 1);
  SplitMix64 rng(3);
  const Tensor x = random_tensor(rng, {n, n, 24}, 0.0, 1.0);
  std::vector<double> mv(n * n);
  for (double& v : mv) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
  const Mask m = Mask::from_grid(Tensor({n, n, 1}, mv));
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(x, m));
}
BENCHMARK(BM_MagaConvLayer)->Arg(16)->Arg(32);

void BM_ModelForward(benchmark::State& state) {
  const CompletionModel model;
  const Sample s = generate_sample(1, SampleOptions{});
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(s.depth_input, s.color));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  CompletionModel model;
  const Sample s = generate_sample(1, SampleOptions{});
  for (auto _ : state) {
    model.params().zero_grad();
    GradTape tape;
    tape.backward(completion_loss(model.forward(s.depth_input, s.color), s.depth_gt).total);
  }
}
BENCHMARK(BM_ModelForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace maga

BENCHMARK_MAIN();
