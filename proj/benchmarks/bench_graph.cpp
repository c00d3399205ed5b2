#include <benchmark/benchmark.h>

#include "semilb/vcover/generate.hpp"
#include "semilb/vcover/graph.hpp"
#include "semilb/vcover/problem.hpp"

using namespace semilb;

static void BM_Reduce(benchmark::State& state) {
  const vc::Graph g = vc::gen_gnp(static_cast<int>(state.range(0)), 3.0 / static_cast<double>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vc::reduced(g));
  }
}
BENCHMARK(BM_Reduce)->Arg(100)->Arg(600)->Arg(1000);

static void BM_MaxDegreeVertex(benchmark::State& state) {
  const vc::Graph g = vc::gen_gnp(static_cast<int>(state.range(0)), 0.1, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.max_degree_vertex());
  }
}
BENCHMARK(BM_MaxDegreeVertex)->Arg(100)->Arg(1000);

static void BM_Branch(benchmark::State& state) {
  const vc::VertexCoverProblem problem(vc::gen_gnp(static_cast<int>(state.range(0)), 0.1, 3));
  const vc::Graph root = problem.root();
  for (auto _ : state) {
    benchmark::DoNotOptimize(problem.branch(root, kUnboundedValue));
  }
}
BENCHMARK(BM_Branch)->Arg(100)->Arg(500);

static void BM_SequentialMvc(benchmark::State& state) {
  const vc::Graph g = vc::gen_gnp(static_cast<int>(state.range(0)), 0.1, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vc::mvc_sequential(g).size);
  }
}
BENCHMARK(BM_SequentialMvc)->Arg(60)->Arg(90)->Unit(benchmark::kMillisecond);
