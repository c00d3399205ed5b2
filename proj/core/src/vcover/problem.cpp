#include "semilb/vcover/problem.hpp"

namespace semilb::vc {

VertexCoverProblem::VertexCoverProblem(Graph base, Encoding encoding)
    : base_(std::move(base)), encoding_(encoding) {}

BranchOutcome<Graph, VertexSet> VertexCoverProblem::branch(const Graph& g, Value best) const {
  using Outcome = BranchOutcome<Graph, VertexSet>;
  Graph h = g;
  reduce(h);
  if (h.cover_size() >= best) return Outcome::pruned();
  if (h.edge_count() == 0) return Outcome::solved(h.cover());

  const int u = *h.max_degree_vertex();
  Graph right = h;
  for (int v : h.neighbors(u).members()) right.take(v);
  Graph left = std::move(h);
  left.take(u);
  std::vector<Graph> children;
  children.reserve(2);
  children.push_back(std::move(left));
  children.push_back(std::move(right));
  return Outcome::branched(std::move(children));
}

MvcResult mvc_sequential(const Graph& g) {
  const VertexCoverProblem problem(g, Encoding::Optimized);
  auto r = solve_sequential(problem, g);
  MvcResult out;
  out.nodes = r.nodes;
  if (!r.best_solution) throw ContractViolation("sequential search found no cover");
  out.cover = std::move(*r.best_solution);
  out.size = out.cover.count();
  if (!g.is_cover(out.cover)) throw ContractViolation("sequential search returned an invalid cover");
  return out;
}

}  // namespace semilb::vc
