// Micro benchmarks for the neighbor-search building blocks on the categorical
// benchmark table (d = 22).

#include <benchmark/benchmark.h>

#include "llmforest/baselines.hpp"
#include "llmforest/infograph.hpp"
#include "llmforest/merge.hpp"
#include "llmforest/synthetic.hpp"
#include "llmforest/walk.hpp"

using namespace llmforest;

namespace {

constexpr std::size_t kFeatures = 22;

void BM_BuildAll(benchmark::State& state) {
  const Table t = make_bench_table(static_cast<std::size_t>(state.range(0)), kFeatures, 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_all(t));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildAll)->RangeMultiplier(2)->Range(500, 4000)->Complexity();

void BM_MergePair(benchmark::State& state) {
  const Table t = make_bench_table(static_cast<std::size_t>(state.range(0)), kFeatures, 2);
  const auto graphs = build_all(t);
  const auto sigma = MergeThreshold::parse("shared_count:20");
  for (auto _ : state) benchmark::DoNotOptimize(merge_pair(graphs[0], graphs[1], sigma));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MergePair)->RangeMultiplier(2)->Range(500, 4000)->Complexity();

void BM_SelectNeighbors(benchmark::State& state) {
  const Table t = make_bench_table(static_cast<std::size_t>(state.range(0)), kFeatures, 3);
  auto graphs = build_all(t);
  const auto plan = plan_hierarchy(graphs, max_merge_levels(graphs.size()), MergeThreshold{}, 3);
  const auto merged = run_merge(std::move(graphs), plan);
  const auto indices = index_graphs(merged, 1.0);
  WalkConfig cfg;
  std::size_t target = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_neighbors(indices, target, cfg));
    target = (target + 1) % t.rows();
  }
}
BENCHMARK(BM_SelectNeighbors)->Arg(1000)->Arg(4000);

void BM_KnnNeighborSearch(benchmark::State& state) {
  const Table t = make_bench_table(static_cast<std::size_t>(state.range(0)), kFeatures, 4);
  for (auto _ : state) benchmark::DoNotOptimize(knn_neighbor_search(t, 5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnNeighborSearch)->RangeMultiplier(2)->Range(250, 2000)->Complexity(benchmark::oNSquared);

}  // namespace

BENCHMARK_MAIN();
