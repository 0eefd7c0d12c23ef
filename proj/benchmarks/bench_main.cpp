#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "neurotopo/bottleneck.hpp"
#include "neurotopo/outlier.hpp"
#include "neurotopo/persistence.hpp"
#include "neurotopo/pointcloud.hpp"
#include "neurotopo/rips.hpp"

using namespace neurotopo;

namespace {

PointCloud gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n * d);
  for (auto& x : v) x = g(rng);
  return PointCloud(n, d, std::move(v));
}

PersistenceDiagram diagram_of(std::size_t n, std::uint64_t seed) {
  RipsOptions o;
  o.max_dim = 1;
  return compute_persistence(build_filtration(distance_matrix(gaussian(n, 4, seed)), o));
}

void BM_Distances(benchmark::State& state) {
  const auto cloud = gaussian(static_cast<std::size_t>(state.range(0)), 64, 1);
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(cloud));
}
BENCHMARK(BM_Distances)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Lof(benchmark::State& state) {
  const auto dm = distance_matrix(gaussian(static_cast<std::size_t>(state.range(0)), 16, 2));
  for (auto _ : state) benchmark::DoNotOptimize(lof_scores(dm, 20));
}
BENCHMARK(BM_Lof)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_RipsPersistence(benchmark::State& state) {
  const auto dm = distance_matrix(gaussian(static_cast<std::size_t>(state.range(0)), 8, 3));
  RipsOptions o;
  o.max_dim = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(compute_persistence(build_filtration(dm, o)));
}
BENCHMARK(BM_RipsPersistence)
    ->Args({200, 1})
    ->Args({500, 0})
    ->Args({500, 1})
    ->Args({60, 2})
    ->Unit(benchmark::kMillisecond);

void BM_Bottleneck(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = diagram_of(n, 4);
  const auto b = diagram_of(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(bottleneck_distance(a, b, 0));
}
BENCHMARK(BM_Bottleneck)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
