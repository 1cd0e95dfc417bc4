#include <benchmark/benchmark.h>

#include "hyperpc/chamfer.hpp"
#include "hyperpc/parallel.hpp"
#include "hyperpc/random.hpp"

namespace {

using namespace hyperpc;

PointCloud cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = Point3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return PointCloud(std::move(pts));
}

void BM_ChamferIndexed(benchmark::State& state) {
  set_thread_count(1);
  const auto x = cloud(static_cast<std::size_t>(state.range(0)), 1);
  const auto y = cloud(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_distance(x, y, ChamferVariant::L1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChamferIndexed)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_ChamferBruteForce(benchmark::State& state) {
  set_thread_count(1);
  const auto x = cloud(static_cast<std::size_t>(state.range(0)), 1);
  const auto y = cloud(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_distance_brute_force(x, y, ChamferVariant::L1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChamferBruteForce)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_HyperChamfer(benchmark::State& state) {
  set_thread_count(static_cast<unsigned>(state.range(1)));
  const auto x = cloud(static_cast<std::size_t>(state.range(0)), 1);
  const auto y = cloud(static_cast<std::size_t>(state.range(0)), 2);
  const auto curv = Curvature::from_k(-0.14);
  for (auto _ : state) benchmark::DoNotOptimize(hyper_chamfer(x, y, curv));
}
BENCHMARK(BM_HyperChamfer)->ArgsProduct({{256, 1024, 2048}, {1, 4}})->UseRealTime();

}  // namespace
