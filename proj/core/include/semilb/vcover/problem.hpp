#pragma once

#include <span>

#include "semilb/problem.hpp"
#include "semilb/vcover/encoding.hpp"
#include "semilb/vcover/graph.hpp"

namespace semilb::vc {

/// Minimum vertex cover as a branching problem. An instance is a graph that
/// carries its partial cover; a solution is a complete cover.
class VertexCoverProblem {
 public:
  using Instance = Graph;
  using Solution = VertexSet;

  explicit VertexCoverProblem(Graph base, Encoding encoding = Encoding::Optimized);

  /// Reduces, then prunes, reports a cover, or splits on a max-degree vertex
  /// u into (G - u, S + u) and (G - N(u), S + N(u)).
  [[nodiscard]] BranchOutcome<Graph, VertexSet> branch(const Graph& g, Value best) const;

  [[nodiscard]] Bytes serialize(const Graph& g) const { return encode(g, encoding_); }
  [[nodiscard]] Graph deserialize(std::span<const std::uint8_t> bytes) const {
    return decode(bytes, encoding_, &base_);
  }
  [[nodiscard]] std::int64_t priority(const Graph& g) const { return g.vertex_count(); }
  [[nodiscard]] Value solution_value(const VertexSet& s) const { return s.count(); }
  [[nodiscard]] Bytes serialize_solution(const VertexSet& s) const { return encode_set(s); }
  [[nodiscard]] VertexSet deserialize_solution(std::span<const std::uint8_t> bytes) const {
    return decode_set(bytes, base_.universe());
  }
  [[nodiscard]] int max_branching_factor() const { return 2; }
  [[nodiscard]] Graph root() const { return base_; }
  [[nodiscard]] bool explore_after_solution() const { return false; }

  [[nodiscard]] const Graph& base() const { return base_; }
  [[nodiscard]] Encoding encoding() const { return encoding_; }

 private:
  Graph base_;
  Encoding encoding_;
};

static_assert(BranchingProblem<VertexCoverProblem>);

struct MvcResult {
  int size = 0;
  VertexSet cover;
  std::uint64_t nodes = 0;
};

/// Exact minimum vertex cover by plain recursion. The cover is checked
/// against g before returning.
MvcResult mvc_sequential(const Graph& g);

}  // namespace semilb::vc
