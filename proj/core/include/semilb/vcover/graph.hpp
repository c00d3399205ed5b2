#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace semilb::vc {

/// Fixed-universe bit set over vertices 0..n-1.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(int universe)
      : universe_(universe), words_(static_cast<std::size_t>(word_count(universe)), 0) {}

  static int word_count(int universe) { return (universe + 63) / 64; }

  [[nodiscard]] int universe() const { return universe_; }
  [[nodiscard]] bool test(int v) const { return (words_[static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1U; }
  void set(int v) { words_[static_cast<std::size_t>(v) >> 6] |= std::uint64_t{1} << (v & 63); }
  void reset(int v) { words_[static_cast<std::size_t>(v) >> 6] &= ~(std::uint64_t{1} << (v & 63)); }

  [[nodiscard]] int count() const {
    int c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }
  [[nodiscard]] bool empty() const {
    for (auto w : words_) {
      if (w != 0) return false;
    }
    return true;
  }
  [[nodiscard]] bool intersects(const VertexSet& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if ((words_[i] & other.words_[i]) != 0) return true;
    }
    return false;
  }

  VertexSet& operator|=(const VertexSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  VertexSet& operator&=(const VertexSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w != 0) {
        f(static_cast<int>(i * 64 + static_cast<std::size_t>(std::countr_zero(w))));
        w &= w - 1;
      }
    }
  }

  [[nodiscard]] std::vector<int> members() const {
    std::vector<int> out;
    for_each([&](int v) { out.push_back(v); });
    return out;
  }

  [[nodiscard]] std::vector<std::uint64_t>& words() { return words_; }
  [[nodiscard]] const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const VertexSet&) const = default;

 private:
  int universe_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Graph on a fixed vertex universe with one adjacency bit row per vertex.
/// Removing a vertex clears its present bit and its adjacency; indices never
/// change. The partial cover built while branching travels with the graph.
class Graph {
 public:
  Graph() = default;
  /// n present vertices, no edges, empty cover.
  explicit Graph(int n);

  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

  [[nodiscard]] int universe() const { return n_; }
  [[nodiscard]] int vertex_count() const { return present_.count(); }
  [[nodiscard]] std::int64_t edge_count() const { return edges_; }
  [[nodiscard]] bool has_vertex(int v) const { return present_.test(v); }
  [[nodiscard]] bool has_edge(int u, int v) const {
    return (row(u)[static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1U;
  }
  [[nodiscard]] int degree(int v) const { return degree_[static_cast<std::size_t>(v)]; }

  /// Adds edge u-v between present vertices. Returns false if it already
  /// existed. Self loops are rejected.
  bool add_edge(int u, int v);

  void remove_vertex(int v);
  /// Moves v into the cover and removes it.
  void take(int v);

  [[nodiscard]] const VertexSet& present() const { return present_; }
  [[nodiscard]] const VertexSet& cover() const { return cover_; }
  [[nodiscard]] int cover_size() const { return cover_.count(); }
  /// Replaces the partial cover; must be disjoint from the present vertices.
  void set_cover(VertexSet cover);

  [[nodiscard]] const std::uint64_t* row(int v) const {
    return rows_.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(words_);
  }
  [[nodiscard]] VertexSet neighbors(int v) const;
  [[nodiscard]] int words_per_row() const { return words_; }

  /// Subgraph induced by `keep` (intersected with the present vertices).
  /// Keeps this graph's cover.
  [[nodiscard]] Graph induced(const VertexSet& keep) const;

  /// Present vertex of maximum degree, lowest index on ties.
  [[nodiscard]] std::optional<int> max_degree_vertex() const;

  [[nodiscard]] std::vector<std::pair<int, int>> edges() const;
  /// True if every edge of this graph has an endpoint in `s`.
  [[nodiscard]] bool is_cover(const VertexSet& s) const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && present_ == other.present_ && cover_ == other.cover_ && rows_ == other.rows_;
  }

 private:
  std::uint64_t* mutable_row(int v) {
    return rows_.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(words_);
  }
  void recount();

  int n_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> rows_;
  std::vector<int> degree_;
  std::int64_t edges_ = 0;
  VertexSet present_;
  VertexSet cover_;
};

/// Applies the three reduction rules until nothing changes: drop isolated
/// vertices; for a degree-1 vertex take its neighbor; for a degree-2 vertex
/// whose neighbors are adjacent take both neighbors.
void reduce(Graph& g);
[[nodiscard]] Graph reduced(Graph g);

}  // namespace semilb::vc
