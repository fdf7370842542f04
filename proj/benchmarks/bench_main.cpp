#include <benchmark/benchmark.h>

#include "segstitch/boxes.hpp"
#include "segstitch/consensus.hpp"
#include "segstitch/dpp.hpp"
#include "segstitch/scene.hpp"

namespace {

using namespace segstitch;

SceneConfig scene_config(int side) {
  SceneConfig c;
  c.grid = GridSpec(side, side, 16, 32);
  c.kernel = {0.5, 1.0};
  return c;
}

void BM_DppSample(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const DppSampler sampler(build_rbf_kernel(side, side, {0.5, 1.0}));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_DppSample)->Arg(4)->Arg(8)->Arg(16);

void BM_DppLogProb(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto k = build_rbf_kernel(side, side, {0.5, 1.0});
  Rng rng(2);
  const BinaryField omega = dpp_sample(k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dpp_log_prob(k, omega));
}
BENCHMARK(BM_DppLogProb)->Arg(4)->Arg(8)->Arg(16);

void BM_Nms(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Rng rng(3);
  ProposalSet s;
  s.probs = ProbField(side, side);
  s.provisional = BinaryField(side, side);
  for (int i = 0; i < side * side; ++i) {
    s.boxes.push_back({16.0 * side * uniform01(rng), 16.0 * side * uniform01(rng), 16 + 16 * uniform01(rng),
                       16 + 16 * uniform01(rng)});
    s.probs[static_cast<std::size_t>(i)] = uniform01(rng);
    s.provisional[static_cast<std::size_t>(i)] = 1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(nms(s, kNmsAlphaTest));
}
BENCHMARK(BM_Nms)->Arg(5)->Arg(10)->Arg(20);

void BM_GenerateScene(benchmark::State& state) {
  const SceneGenerator gen(scene_config(static_cast<int>(state.range(0))));
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng rng = make_rng(4, "scene", i++);
    benchmark::DoNotOptimize(gen.generate(rng));
  }
}
BENCHMARK(BM_GenerateScene)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

struct ConsensusFixture {
  SceneBundle bundle;
  PosteriorSimulator sim;
  ResolutionConfig resolution{Objective::cpm, 0.01, 4.0, kDefaultEdgeMin};

  explicit ConsensusFixture(int side)
      : bundle([&] {
          Rng rng = make_rng(5, "scene", 0);
          return SceneGenerator(scene_config(side)).generate(rng);
        }()),
        sim(bundle.truth_pi, 16, PosteriorNoise{0.1, 2.0, 0.05, 0.05}) {}

  WindowSampler sampler() const {
    return [this](std::size_t w, int s, const WindowPlan& plan) {
      Rng r = make_rng(6, "sample", w * 64 + static_cast<std::size_t>(s));
      return sim.sample(plan.image_row(w), plan.image_col(w), plan.window_px, plan.window_px, r);
    };
  }
};

void BM_AccumulateWindow(benchmark::State& state) {
  const ConsensusFixture f(160);
  const TilePlan tiles = tile_plan(160, 160, 80, 20);
  const auto sampler = f.sampler();
  const MixingStack pi = sampler(12, 0, tiles.plan);
  EdgeAccumulator acc(tiles.plan, f.resolution);
  for (auto _ : state) acc.add_window(12, pi);
}
BENCHMARK(BM_AccumulateWindow)->Unit(benchmark::kMicrosecond);

void BM_DetectCommunities(benchmark::State& state) {
  const ConsensusFixture f(160);
  const TilePlan tiles = tile_plan(160, 160, 80, 20);
  const auto sampler = f.sampler();
  EdgeAccumulator acc(tiles.plan, f.resolution);
  for (std::size_t w = 0; w < tiles.plan.windows.size(); ++w)
    for (int s = 0; s < 8; ++s) acc.add_window(w, sampler(w, s, tiles.plan));
  const EdgeList graph = acc.finalize(8);
  state.counters["edges"] = static_cast<double>(graph.size());
  for (auto _ : state) benchmark::DoNotOptimize(detect_communities(graph, f.resolution, 1, 160 * 160));
}
BENCHMARK(BM_DetectCommunities)->Unit(benchmark::kMillisecond);

void BM_ConsensusSegment(benchmark::State& state) {
  const ConsensusFixture f(160);
  ConsensusConfig cfg;
  cfg.resolution = f.resolution;
  cfg.n_post = static_cast<int>(state.range(0));
  const auto sampler = f.sampler();
  for (auto _ : state) benchmark::DoNotOptimize(consensus_segment(160, 160, sampler, cfg, 1));
}
BENCHMARK(BM_ConsensusSegment)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DisjointPointEstimate(benchmark::State& state) {
  const ConsensusFixture f(160);
  const auto sampler = f.sampler();
  for (auto _ : state) benchmark::DoNotOptimize(disjoint_point_estimate(160, 160, 80, sampler));
}
BENCHMARK(BM_DisjointPointEstimate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
