#include <benchmark/benchmark.h>

#include "hyperpc/hyperbolicity.hpp"
#include "hyperpc/parallel.hpp"
#include "hyperpc/random.hpp"

namespace {

using namespace hyperpc;

std::vector<Vec> points(std::size_t n) {
  Rng rng(3);
  std::vector<Vec> out(n, Vec(8));
  for (auto& v : out)
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 0.2 * rng.normal();
  return out;
}

void BM_GromovDelta(benchmark::State& state) {
  set_thread_count(1);
  const auto dm = pairwise_distances(points(static_cast<std::size_t>(state.range(0))), Metric::euclidean());
  for (auto _ : state) benchmark::DoNotOptimize(gromov_delta(dm, 0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GromovDelta)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNCubed);

void BM_FourPointDelta(benchmark::State& state) {
  set_thread_count(1);
  const auto dm = pairwise_distances(points(static_cast<std::size_t>(state.range(0))), Metric::euclidean());
  for (auto _ : state) benchmark::DoNotOptimize(four_point_delta(dm));
}
BENCHMARK(BM_FourPointDelta)->Arg(32)->Arg(64);

// Default protocol: 3 batches of 1500 points.
void BM_SampledDeltaHyperbolic(benchmark::State& state) {
  set_thread_count(1);
  const auto pts = points(4000);
  const auto metric = Metric::hyperbolic(Curvature::from_k(-0.14));
  for (auto _ : state) benchmark::DoNotOptimize(sampled_delta(pts, metric, 1500, 3, 42).delta_rel);
}
BENCHMARK(BM_SampledDeltaHyperbolic)->Unit(benchmark::kMillisecond);

}  // namespace
