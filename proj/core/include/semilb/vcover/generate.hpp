#pragma once

#include <cstdint>

#include "semilb/vcover/graph.hpp"

namespace semilb::vc {

/// Erdos-Renyi G(n, p): each of the n(n-1)/2 pairs is an edge with
/// probability p, drawn from a 64-bit Mersenne Twister seeded with `seed`.
Graph gen_gnp(int n, double p, std::uint64_t seed);

/// Minimum vertex cover size by trying subsets of the present vertices in
/// increasing size. At most 26 present vertices.
int brute_force_mvc(const Graph& g);

inline constexpr int kBruteForceLimit = 26;

}  // namespace semilb::vc
