// Library kernels (kd-tree, OpenMP) against the serial reference oracles.
#include <benchmark/benchmark.h>

#include <random>

#include "pcad/features/fpfh.hpp"
#include "pcad/geom/normals.hpp"
#include "pcad/geom/sampling.hpp"
#include "pcad/geom/spatial_index.hpp"
#include "pcad/reference.hpp"
#include "pcad/support/coreset.hpp"
#include "pcad/synth/synth.hpp"

namespace {

using namespace pcad;

LabeledCloud torus(std::size_t n) {
  auto c = gen_shape({Primitive::torus, n, 0.0, 1});
  c.normals.clear();
  return estimate_normals(c, 20);
}

FeatureSet features(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0.0f, 1.0f);
  FeatureSet f;
  f.dim = dim;
  f.values.resize(n * dim);
  for (auto& v : f.values) v = g(rng);
  return f;
}

void BM_NeighborTable(benchmark::State& state) {
  const auto c = torus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    SpatialIndex index(c.points);
    benchmark::DoNotOptimize(build_neighbor_table(c.points, index, 40));
  }
}

void BM_NeighborTableReference(benchmark::State& state) {
  const auto c = torus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    for (const auto& p : c.points) benchmark::DoNotOptimize(reference::knn(c.points, p, 41));
}

void BM_Fps(benchmark::State& state) {
  const auto c = torus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_sample_from(c.points, 256, 0));
}

void BM_FpsReference(benchmark::State& state) {
  const auto c = torus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::fps(c.points, 256, 0));
}

void BM_Greedy(benchmark::State& state) {
  const auto f = features(static_cast<std::size_t>(state.range(0)), 99);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_coreset_from(f, 200, 0));
}

void BM_GreedyReference(benchmark::State& state) {
  const auto f = features(static_cast<std::size_t>(state.range(0)), 99);
  for (auto _ : state) benchmark::DoNotOptimize(reference::greedy(f, 200, 0));
}

void BM_Fpfh(benchmark::State& state) {
  const auto c = torus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_fpfh(c, 40));
}

void BM_FpfhReference(benchmark::State& state) {
  const auto c = torus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::fpfh(c.points, c.normals, 40));
}

void BM_NearestRows(benchmark::State& state) {
  const auto bank = features(1000, 99);
  const auto queries = features(static_cast<std::size_t>(state.range(0)), 99);
  for (auto _ : state) benchmark::DoNotOptimize(nearest_rows(bank, queries.values.data(), queries.rows()));
}

void BM_NearestRowScan(benchmark::State& state) {
  const auto bank = features(1000, 99);
  const auto queries = features(static_cast<std::size_t>(state.range(0)), 99);
  for (auto _ : state)
    for (std::size_t q = 0; q < queries.rows(); ++q) benchmark::DoNotOptimize(nearest_row(bank, queries.row(q)));
}

}  // namespace

BENCHMARK(BM_NeighborTable)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NeighborTableReference)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fps)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FpsReference)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Greedy)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GreedyReference)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fpfh)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FpfhReference)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestRows)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestRowScan)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
