// Copyright 2026 The DHCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dhcn/context_graph.h"
#include "dhcn/linalg.h"
#include "dhcn/network.h"
#include "dhcn/svm.h"
#include "dhcn/synthetic.h"
#include "dhcn/training.h"

namespace dhcn {
namespace {

Matrix RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// Training-scale network: 8x10 grid, d0 = 16, default depth.
struct Network {
  std::vector<Matrix> phi0;
  PerLayerContexts contexts;
  DepthConfig depth;
  LabelMatrix labels;

  explicit Network(std::size_t images) {
    const GridSpec grid{8, 10};
    for (std::size_t p = 0; p < images; ++p) phi0.push_back(RandomMatrix(grid.cells(), 16, p));
    Matrix pooled(images, 16);
    for (std::size_t p = 0; p < images; ++p) {
      const auto v = Pool(phi0[p]);
      std::copy(v.begin(), v.end(), pooled.row(p).begin());
    }
    const GeometricContext geo = BuildGeometricContext(grid, 2.0);
    const SemanticContext sem = BuildSemanticAdjacency(pooled, 5, Similarity::kCosine);
    contexts = MakePerLayerContexts(geo, &sem, depth);
    labels = LabelMatrix(images, 4);
    for (std::size_t p = 0; p < images; ++p) labels.set(p, p % 4, true);
  }
};

void BM_MatMul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = RandomMatrix(n, n, 1);
  const Matrix b = RandomMatrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(MatMul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatMul)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_SymEig(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = RandomMatrix(n, n, 3);
  const Matrix s = MatMulTransB(a, a);
  for (auto _ : state) benchmark::DoNotOptimize(SymEig(s));
}
BENCHMARK(BM_SymEig)->RangeMultiplier(2)->Range(16, 128);

void BM_ForwardAll(benchmark::State& state) {
  const Network net(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ForwardAll(net.phi0, net.contexts, net.depth));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardAll)->Arg(16)->Arg(64);

void BM_Backprop(benchmark::State& state) {
  const Network net(static_cast<std::size_t>(state.range(0)));
  const LayerStack stack = ForwardAll(net.phi0, net.contexts, net.depth);
  const Matrix grad = RandomMatrix(stack.final_maps().rows(), stack.final_maps().cols(), 9);
  for (auto _ : state)
    benchmark::DoNotOptimize(BackpropContexts(stack, net.contexts, grad, net.depth));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backprop)->Arg(16)->Arg(64);

void BM_TrainSvms(benchmark::State& state) {
  const Network net(static_cast<std::size_t>(state.range(0)));
  const LayerStack stack = ForwardAll(net.phi0, net.contexts, net.depth);
  for (auto _ : state)
    benchmark::DoNotOptimize(TrainSvms(stack.final_maps(), net.labels, SvmOptions{}));
}
BENCHMARK(BM_TrainSvms)->Arg(16)->Arg(64);

void BM_TrainDhcn(benchmark::State& state) {
  SyntheticOptions o;
  o.num_images = 60;
  const Dataset data = MakePlantedDataset(o);
  TrainConfig cfg;
  cfg.outer_iters = static_cast<std::size_t>(state.range(0));
  ContextOptions ctx;
  ctx.radius = 1.5;
  ctx.semantic_k = 5;
  for (auto _ : state)
    benchmark::DoNotOptimize(Train(data, cfg, DepthConfig{}, ctx, InitialMapOptions{}));
}
BENCHMARK(BM_TrainDhcn)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dhcn

BENCHMARK_MAIN();
