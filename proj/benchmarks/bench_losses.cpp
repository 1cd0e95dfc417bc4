#include <benchmark/benchmark.h>

#include "hyperpc/embedopt.hpp"
#include "hyperpc/parallel.hpp"

namespace {

using namespace hyperpc;

struct Fixture {
  HierarchyManifest data;
  TrainConfig config;
  EmbeddingState state;
  Batch batch;

  Fixture() {
    set_thread_count(1);
    DatasetConfig d;
    d.points_whole = 64;
    data = generate_dataset(d);
    state = init_state(data, config);
    batch = monitoring_batch(data, config);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_LossGradients(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(loss_gradients(f.batch, f.state, f.config.loss_options()).report.total);
}
BENCHMARK(BM_LossGradients);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& f = fixture();
  TrainConfig c = f.config;
  c.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(f.state, f.data, c).curve.back().total);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_GradientSuite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_gradient_suite(42, 10).worst.max_rel_error);
}
BENCHMARK(BM_GradientSuite)->Unit(benchmark::kMillisecond);

}  // namespace
