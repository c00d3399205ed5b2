#include "semilb/vcover/graph.hpp"

#include <stdexcept>
#include <string>

#include "semilb/types.hpp"

namespace semilb::vc {

Graph::Graph(int n)
    : n_(n),
      words_(VertexSet::word_count(n)),
      rows_(static_cast<std::size_t>(n) * static_cast<std::size_t>(VertexSet::word_count(n)), 0),
      degree_(static_cast<std::size_t>(n), 0),
      present_(n),
      cover_(n) {
  if (n < 0) throw ContractViolation("negative vertex count");
  for (int v = 0; v < n; ++v) present_.set(v);
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Graph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

bool Graph::add_edge(int u, int v) {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) throw ContractViolation("edge endpoint out of range");
  if (u == v) throw ContractViolation("self loop " + std::to_string(u));
  if (!present_.test(u) || !present_.test(v)) throw ContractViolation("edge endpoint not present");
  if (has_edge(u, v)) return false;
  mutable_row(u)[static_cast<std::size_t>(v) >> 6] |= std::uint64_t{1} << (v & 63);
  mutable_row(v)[static_cast<std::size_t>(u) >> 6] |= std::uint64_t{1} << (u & 63);
  ++degree_[static_cast<std::size_t>(u)];
  ++degree_[static_cast<std::size_t>(v)];
  ++edges_;
  return true;
}

void Graph::remove_vertex(int v) {
  if (!present_.test(v)) return;
  std::uint64_t* r = mutable_row(v);
  const std::uint64_t bit = std::uint64_t{1} << (v & 63);
  const std::size_t word = static_cast<std::size_t>(v) >> 6;
  for (int i = 0; i < words_; ++i) {
    std::uint64_t w = r[i];
    while (w != 0) {
      const int u = i * 64 + std::countr_zero(w);
      w &= w - 1;
      mutable_row(u)[word] &= ~bit;
      --degree_[static_cast<std::size_t>(u)];
      --edges_;
    }
    r[i] = 0;
  }
  degree_[static_cast<std::size_t>(v)] = 0;
  present_.reset(v);
}

void Graph::take(int v) {
  remove_vertex(v);
  cover_.set(v);
}

void Graph::set_cover(VertexSet cover) {
  if (cover.universe() != n_) throw ContractViolation("cover universe mismatch");
  if (cover.intersects(present_)) throw ContractViolation("cover overlaps present vertices");
  cover_ = std::move(cover);
}

VertexSet Graph::neighbors(int v) const {
  VertexSet s(n_);
  const std::uint64_t* r = row(v);
  for (int i = 0; i < words_; ++i) s.words()[static_cast<std::size_t>(i)] = r[i];
  return s;
}

Graph Graph::induced(const VertexSet& keep) const {
  Graph g;
  g.n_ = n_;
  g.words_ = words_;
  g.rows_.assign(rows_.size(), 0);
  g.degree_.assign(degree_.size(), 0);
  g.present_ = present_;
  g.present_ &= keep;
  g.cover_ = cover_;
  const auto& mask = g.present_.words();
  g.present_.for_each([&](int v) {
    const std::uint64_t* src = row(v);
    std::uint64_t* dst = g.mutable_row(v);
    for (int i = 0; i < words_; ++i) dst[i] = src[i] & mask[static_cast<std::size_t>(i)];
  });
  g.recount();
  return g;
}

void Graph::recount() {
  edges_ = 0;
  for (int v = 0; v < n_; ++v) {
    int d = 0;
    const std::uint64_t* r = row(v);
    for (int i = 0; i < words_; ++i) d += std::popcount(r[i]);
    degree_[static_cast<std::size_t>(v)] = d;
    edges_ += d;
  }
  edges_ /= 2;
}

std::optional<int> Graph::max_degree_vertex() const {
  std::optional<int> best;
  int best_degree = -1;
  present_.for_each([&](int v) {
    if (degree_[static_cast<std::size_t>(v)] > best_degree) {
      best_degree = degree_[static_cast<std::size_t>(v)];
      best = v;
    }
  });
  return best;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n_; ++u) {
    const std::uint64_t* r = row(u);
    for (int i = 0; i < words_; ++i) {
      std::uint64_t w = r[i];
      while (w != 0) {
        const int v = i * 64 + std::countr_zero(w);
        w &= w - 1;
        if (u < v) out.emplace_back(u, v);
      }
    }
  }
  return out;
}

bool Graph::is_cover(const VertexSet& s) const {
  for (int u = 0; u < n_; ++u) {
    if (s.test(u)) continue;
    const std::uint64_t* r = row(u);
    for (int i = 0; i < words_; ++i) {
      // Every neighbor of an uncovered vertex must be covered.
      if ((r[i] & ~s.words()[static_cast<std::size_t>(i)]) != 0) return false;
    }
  }
  return true;
}

}  // namespace semilb::vc
