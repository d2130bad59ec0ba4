#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hcmon/geometry.hpp"

using namespace hcmon;

namespace {

std::vector<std::pair<ConvexPolygon, ConvexPolygon>> boxes(std::size_t n) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> pos(-6, 6), h(-3.1, 3.1);
  std::vector<std::pair<ConvexPolygon, ConvexPolygon>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(oriented_box({0, 0, h(rng)}, {4.0, 1.8}),
                     oriented_box({pos(rng), pos(rng), h(rng)}, {4.5, 1.9}));
  }
  return out;
}

void BM_MinDistance(benchmark::State& state) {
  const auto pairs = boxes(256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pairs[i++ & 255];
    benchmark::DoNotOptimize(min_distance(p.first, p.second));
  }
}
BENCHMARK(BM_MinDistance);

void BM_OverlapArea(benchmark::State& state) {
  const auto pairs = boxes(256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pairs[i++ & 255];
    benchmark::DoNotOptimize(overlap_area(p.first, p.second));
  }
}
BENCHMARK(BM_OverlapArea);

void BM_DangerSpace(benchmark::State& state) {
  const Pose2D pose{10, 1, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(danger_space(pose, {4.0, 1.8}, 71.4));
}
BENCHMARK(BM_DangerSpace);

}  // namespace

BENCHMARK_MAIN();
