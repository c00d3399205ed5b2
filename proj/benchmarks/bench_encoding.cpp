#include <benchmark/benchmark.h>

#include "semilb/vcover/encoding.hpp"
#include "semilb/vcover/generate.hpp"

using namespace semilb;

namespace {

vc::Graph half_reduced(int n) {
  vc::Graph g = vc::gen_gnp(n, 0.5, 7);
  for (int v = 0; v < n; v += 3) g.take(v);
  return g;
}

}  // namespace

static void BM_Encode(benchmark::State& state) {
  const auto enc = static_cast<vc::Encoding>(state.range(1));
  const vc::Graph g = half_reduced(static_cast<int>(state.range(0)));
  std::size_t bytes = 0;
  for (auto _ : state) {
    const Bytes b = vc::encode(g, enc);
    bytes = b.size();
    benchmark::DoNotOptimize(b.data());
  }
  state.counters["payload_bytes"] = static_cast<double>(bytes);
}
BENCHMARK(BM_Encode)->ArgsProduct({{100, 1000}, {0, 1}});

static void BM_Decode(benchmark::State& state) {
  const auto enc = static_cast<vc::Encoding>(state.range(1));
  const int n = static_cast<int>(state.range(0));
  const vc::Graph base = vc::gen_gnp(n, 0.5, 7);
  const Bytes bytes = vc::encode(half_reduced(n), enc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vc::decode(bytes, enc, &base));
  }
}
BENCHMARK(BM_Decode)->ArgsProduct({{100, 1000}, {0, 1}});
