#include "semilb/vcover/generate.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "semilb/types.hpp"

namespace semilb::vc {

Graph gen_gnp(int n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  if (n < 0) throw std::invalid_argument("vertex count must be non-negative");
  Graph g(n);
  std::mt19937_64 rng(seed);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < p) g.add_edge(u, v);
    }
  }
  return g;
}

}  // namespace semilb::vc
