#include <stdexcept>
#include <string>
#include <vector>

#include "semilb/vcover/generate.hpp"

namespace semilb::vc {

int brute_force_mvc(const Graph& g) {
  const std::vector<int> vertices = g.present().members();
  const int k = static_cast<int>(vertices.size());
  if (k > kBruteForceLimit) {
    throw std::invalid_argument("brute force limited to " + std::to_string(kBruteForceLimit) + " vertices, got " +
                                std::to_string(k));
  }
  std::vector<int> local(static_cast<std::size_t>(g.universe()), -1);
  for (int i = 0; i < k; ++i) local[static_cast<std::size_t>(vertices[static_cast<std::size_t>(i)])] = i;
  std::vector<std::uint32_t> edge_masks;
  for (auto [u, v] : g.edges()) {
    edge_masks.push_back((1U << local[static_cast<std::size_t>(u)]) | (1U << local[static_cast<std::size_t>(v)]));
  }
  auto covers = [&](std::uint32_t s) {
    for (auto m : edge_masks) {
      if ((m & s) == 0) return false;
    }
    return true;
  };
  if (covers(0)) return 0;
  const std::uint32_t limit = k == 32 ? 0 : (1U << k);
  for (int size = 1; size <= k; ++size) {
    // Gosper's hack walks all k-bit words with `size` ones in increasing order.
    std::uint32_t s = (1U << size) - 1;
    while (s < limit) {
      if (covers(s)) return size;
      const std::uint32_t c = s & -s;
      const std::uint32_t r = s + c;
      s = (((r ^ s) >> 2) / c) | r;
    }
  }
  return k;
}

}  // namespace semilb::vc
