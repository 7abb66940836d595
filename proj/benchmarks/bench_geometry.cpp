#include <random>

#include <benchmark/benchmark.h>

#include "rieif/geodiag.hpp"

namespace {

using namespace rieif::geo;

PointCloud cloud(std::size_t count, std::size_t dims) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud pc;
  pc.count = count;
  pc.dims = dims;
  pc.x.resize(count * dims);
  for (double& v : pc.x) v = g(rng);
  return pc;
}

void BM_Knn(benchmark::State& st) {
  const PointCloud pc = cloud(static_cast<std::size_t>(st.range(0)), 34);
  for (auto _ : st) benchmark::DoNotOptimize(knn_graph(pc, 15));
}
BENCHMARK(BM_Knn)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Wasserstein(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> cost(n * n), a(n, 1.0 / n), b(n, 1.0 / n);
  for (double& c : cost) c = u(rng);
  for (auto _ : st) benchmark::DoNotOptimize(wasserstein1(a, b, cost));
}
BENCHMARK(BM_Wasserstein)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_Curvature(benchmark::State& st) {
  const NeighborGraph g = knn_graph(cloud(1000, 34), 15);
  for (auto _ : st) benchmark::DoNotOptimize(curvature_summary(g, static_cast<std::size_t>(st.range(0)), 20, 0));
}
BENCHMARK(BM_Curvature)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
