#include <benchmark/benchmark.h>

#include "semilb/task_tree.hpp"

using namespace semilb;

// Dives down a binary tree, extracting the highest-priority task every
// `range(1)` registrations.
static void BM_TaskTreeDive(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const int take_every = static_cast<int>(state.range(1));
  for (auto _ : state) {
    TaskTree<int> tree([](const int& v) { return static_cast<std::int64_t>(v); });
    NodeHandle node = tree.create_root();
    int registrations = 0;
    for (int d = 0; d < depth; ++d) {
      auto kids = tree.register_child_instances(node, {d, d});
      if (take_every > 0 && ++registrations % take_every == 0) {
        benchmark::DoNotOptimize(tree.take_highest_priority());
      }
      bool descended = false;
      for (NodeHandle kid : kids) {
        if (tree.begin_search(kid).stolen()) continue;
        node = kid;
        descended = true;
        break;
      }
      if (!descended) break;
    }
    benchmark::DoNotOptimize(tree.size());
  }
}
BENCHMARK(BM_TaskTreeDive)->ArgsProduct({{64, 1024}, {0, 1, 4}});
