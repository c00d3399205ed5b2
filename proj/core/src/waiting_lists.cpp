#include <functional>

#include "semilb/center.hpp"

namespace semilb {

int waiting_list_depth(int max_branching, int workers) {
  int depth = 0;
  long long reach = 1;
  while (reach < workers) {
    reach *= max_branching;
    ++depth;
  }
  return depth;
}

std::vector<std::vector<Rank>> build_waiting_lists(int max_branching, int workers) {
  if (max_branching < 2) throw ContractViolation("max_branching must be at least 2");
  if (workers < 1) throw ContractViolation("at least one worker is required");
  std::vector<std::vector<Rank>> lists(static_cast<std::size_t>(workers) + 1);
  const int max_depth = waiting_list_depth(max_branching, workers);

  // Each process hands its first max_b - 1 spawned tasks at every depth to
  // fresh processes, and the receivers repeat the pattern one level deeper.
  std::function<void(int, int)> build = [&](int process, int base_depth) {
    long long stride = 1;
    for (int d = 0; d < base_depth; ++d) stride *= max_branching;
    for (int d = base_depth; d <= max_depth; ++d, stride *= max_branching) {
      for (int j = 1; j <= max_branching - 1; ++j) {
        const long long q = j * stride + process;
        if (q <= workers) {
          lists[static_cast<std::size_t>(process)].push_back(Rank{static_cast<int>(q)});
          build(static_cast<int>(q), d + 1);
        }
      }
    }
  };
  build(1, 0);
  return lists;
}

}  // namespace semilb
