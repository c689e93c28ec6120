// Serial reference vs indexed serial vs indexed OpenMP for the nearest-neighbour
// kernels, plus SDF construction.

#include "affordfit/geom/mesh.hpp"
#include "affordfit/geom/sdf.hpp"
#include "affordfit/kernels/nearest.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace affordfit;
using kernels::Exec;

namespace {

std::vector<Vec3> cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

void BM_NearestBrute(benchmark::State& state) {
  const auto ref = cloud(state.range(0), 1), q = cloud(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::nearest_brute<3>(ref, q));
  state.SetItemsProcessed(state.iterations() * q.size());
}

void nearest_indexed(benchmark::State& state, Exec exec) {
  const auto ref = cloud(state.range(0), 1), q = cloud(state.range(0), 2);
  const KdTree<3> tree(ref);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::nearest_indexed<3>(tree, q, exec));
  state.SetItemsProcessed(state.iterations() * q.size());
}
void BM_NearestSerial(benchmark::State& s) { nearest_indexed(s, Exec::serial); }
void BM_NearestParallel(benchmark::State& s) { nearest_indexed(s, Exec::parallel); }

void BM_ChamferBrute(benchmark::State& state) {
  const auto a = cloud(state.range(0), 3), b = cloud(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::chamfer_brute<3>(a, b));
}
void chamfer_indexed(benchmark::State& state, Exec exec) {
  const auto a = cloud(state.range(0), 3), b = cloud(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::chamfer_indexed<3>(a, b, exec));
}
void BM_ChamferSerial(benchmark::State& s) { chamfer_indexed(s, Exec::serial); }
void BM_ChamferParallel(benchmark::State& s) { chamfer_indexed(s, Exec::parallel); }

void BM_MinPairBrute(benchmark::State& state) {
  const auto a = cloud(state.range(0), 5), b = cloud(state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::min_pair_brute(a, b));
}
void min_pair_indexed(benchmark::State& state, Exec exec) {
  const auto a = cloud(state.range(0), 5), b = cloud(state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::min_pair_indexed(a, b, exec));
}
void BM_MinPairSerial(benchmark::State& s) { min_pair_indexed(s, Exec::serial); }
void BM_MinPairParallel(benchmark::State& s) { min_pair_indexed(s, Exec::parallel); }

void sdf_build(benchmark::State& state, Exec exec) {
  const auto mesh = make_icosphere(0.5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_sdf(mesh, static_cast<int>(state.range(0)), exec));
}
void BM_SdfSerial(benchmark::State& s) { sdf_build(s, Exec::serial); }
void BM_SdfParallel(benchmark::State& s) { sdf_build(s, Exec::parallel); }

}  // namespace

BENCHMARK(BM_NearestBrute)->Arg(1 << 10)->Arg(1 << 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestSerial)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestParallel)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ChamferBrute)->Arg(1 << 10)->Arg(1 << 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChamferSerial)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChamferParallel)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MinPairBrute)->Arg(1 << 10)->Arg(1 << 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinPairSerial)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinPairParallel)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SdfSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SdfParallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
