#include <benchmark/benchmark.h>

#include <random>

#include "rsevi/scene.hpp"
#include "rsevi/self_supervision.hpp"

using namespace rsevi;

namespace {

Frame noise_frame(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Frame f(size, size);
  for (double& v : f.data) v = u(rng);
  return f;
}

void BM_WarpBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Frame src = noise_frame(n, 1);
  FlowMap flow(n, n);
  for (std::size_t i = 0; i < flow.dx.size(); ++i) {
    flow.dx[i] = 0.37 * static_cast<double>(i % 7);
    flow.dy[i] = -0.21 * static_cast<double>(i % 5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(warp_backward(src, flow));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_WarpBackward)->Arg(64)->Arg(256);

void BM_WeightMapAnalytic(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const auto src = ExposureModel::rolling(0.0, 0.4, h);
  const auto dst = ExposureModel::global(0.7, h);
  const TimeBins bins(0.0, 1.0, 12);
  for (auto _ : state) benchmark::DoNotOptimize(weight_map_analytic(src, dst, bins, h));
}
BENCHMARK(BM_WeightMapAnalytic)->Arg(64)->Arg(260);

void BM_WeightMapSampled(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const auto src = ExposureModel::rolling(0.0, 0.4, h);
  const auto dst = ExposureModel::global(0.7, h);
  const TimeBins bins(0.0, 1.0, 12);
  for (auto _ : state) benchmark::DoNotOptimize(weight_map_sampled(src, dst, bins, h));
}
BENCHMARK(BM_WeightMapSampled)->Arg(64);

void BM_LossAndGradient(benchmark::State& state) {
  SyntheticPairSpec spec;
  spec.vx_px_per_frame = 3;
  spec.vy_px_per_frame = 1;
  const SyntheticPair pair = make_synthetic_pair(spec);
  FramePairContext ctx{pair.rs0, pair.rs1,
                       oracle_field(pair.scene.motion(), pair.bins, spec.height, spec.width), {}};
  const SelfSupervisedObjective obj(ctx, {}, interpolation_times(ctx, 4));
  std::vector<double> grad;
  for (auto _ : state) benchmark::DoNotOptimize(obj.gradient(ctx.field, grad));
}
BENCHMARK(BM_LossAndGradient)->Unit(benchmark::kMillisecond);

void BM_InterpolateFour(benchmark::State& state) {
  SyntheticPairSpec spec;
  const SyntheticPair pair = make_synthetic_pair(spec);
  FramePairContext ctx{pair.rs0, pair.rs1,
                       oracle_field(pair.scene.motion(), pair.bins, spec.height, spec.width), {}};
  for (auto _ : state) benchmark::DoNotOptimize(interpolate_sequence(ctx, 4));
}
BENCHMARK(BM_InterpolateFour)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
