#include "semilb/vcover/graph.hpp"

namespace semilb::vc {

namespace {

int first_neighbor(const Graph& g, int v, int skip = -1) {
  const std::uint64_t* r = g.row(v);
  for (int i = 0; i < g.words_per_row(); ++i) {
    std::uint64_t w = r[i];
    while (w != 0) {
      const int u = i * 64 + std::countr_zero(w);
      if (u != skip) return u;
      w &= w - 1;
    }
  }
  return -1;
}

bool rule_isolated(Graph& g) {
  bool changed = false;
  for (int v : g.present().members()) {
    if (g.degree(v) == 0) {
      g.remove_vertex(v);
      changed = true;
    }
  }
  return changed;
}

bool rule_degree_one(Graph& g) {
  bool changed = false;
  for (int u : g.present().members()) {
    if (!g.has_vertex(u) || g.degree(u) != 1) continue;
    g.take(first_neighbor(g, u));
    g.remove_vertex(u);
    changed = true;
  }
  return changed;
}

bool rule_triangle(Graph& g) {
  bool changed = false;
  for (int u : g.present().members()) {
    if (!g.has_vertex(u) || g.degree(u) != 2) continue;
    const int v = first_neighbor(g, u);
    const int w = first_neighbor(g, u, v);
    if (!g.has_edge(v, w)) continue;
    g.take(v);
    g.take(w);
    g.remove_vertex(u);
    changed = true;
  }
  return changed;
}

}  // namespace

void reduce(Graph& g) {
  bool changed = true;
  while (changed) {
    changed = rule_isolated(g);
    changed = rule_degree_one(g) || changed;
    changed = rule_triangle(g) || changed;
  }
}

Graph reduced(Graph g) {
  reduce(g);
  return g;
}

}  // namespace semilb::vc
