#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "semilb/vcover/dimacs.hpp"
#include "semilb/vcover/encoding.hpp"
#include "semilb/vcover/generate.hpp"
#include "semilb/vcover/problem.hpp"

using namespace semilb;
using namespace semilb::vc;

namespace {

Graph path3() { return Graph::from_edges(3, {{0, 1}, {1, 2}}); }

Graph cycle(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, e);
}

Graph complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  }
  return Graph::from_edges(n, e);
}

Graph petersen() {
  return Graph::from_edges(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
                                {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}});
}

/// Smallest cover by checking every subset; written separately from the
/// library oracle so the two can be compared.
int subset_mvc(const Graph& g) {
  const int n = g.universe();
  const auto edges = g.edges();
  int best = n;
  for (std::uint32_t s = 0; s < (1U << n); ++s) {
    bool ok = true;
    for (auto [u, v] : edges) {
      if (!((s >> u) & 1U) && !((s >> v) & 1U)) {
        ok = false;
        break;
      }
    }
    if (ok) best = std::min(best, std::popcount(s));
  }
  return best;
}

}  // namespace

TEST_CASE("graph basics") {
  Graph g = path3();
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK(g.degree(1) == 2);
  CHECK_FALSE(g.add_edge(0, 1));
  CHECK_THROWS_AS(g.add_edge(2, 2), ContractViolation);
  g.take(1);
  CHECK(g.edge_count() == 0);
  CHECK(g.cover().members() == std::vector<int>{1});
  CHECK(g.present().members() == std::vector<int>{0, 2});
}

TEST_CASE("reduce: path collapses to its middle vertex") {
  const Graph r = reduced(path3());
  CHECK(r.vertex_count() == 0);
  CHECK(r.cover().members() == std::vector<int>{1});
}

TEST_CASE("reduce: triangle with a pendant needs two vertices") {
  // a=0, b=1, c=2, pendant d=3 on a
  const Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {0, 2}, {0, 3}});
  const Graph r = reduced(g);
  CHECK(r.vertex_count() == 0);
  CHECK(r.cover_size() == 2);
  CHECK(r.cover().test(0));
  CHECK(g.is_cover(r.cover()));
  CHECK(brute_force_mvc(g) == 2);
}

TEST_CASE("reduce: edgeless graph only loses isolated vertices") {
  const Graph r = reduced(Graph(5));
  CHECK(r.vertex_count() == 0);
  CHECK(r.cover_size() == 0);
}

TEST_CASE("reduce: star collapses to its center") {
  const Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const Graph r = reduced(star);
  CHECK(r.cover().members() == std::vector<int>{0});
  CHECK(r.vertex_count() == 0);
}

TEST_CASE("reduce: rule three takes both neighbors of a triangle corner") {
  const Graph g = Graph::from_edges(6, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {1, 4}, {2, 4}, {2, 5}, {3, 4}, {4, 5}, {3, 5}});
  Graph r = g;
  reduce(r);
  CHECK(r.cover().test(1));
  CHECK(r.cover().test(2));
  CHECK_FALSE(r.has_vertex(0));
}

TEST_CASE("branch on a 5-cycle finds a cover of three") {
  const VertexCoverProblem p(cycle(5));
  const auto r = solve_sequential(p, cycle(5));
  CHECK(r.best_value == 3);
  CHECK(subset_mvc(cycle(5)) == 3);
}

TEST_CASE("branch splits on the lowest-index max-degree vertex, left first") {
  Graph g = petersen();
  g.add_edge(3, 6);  // vertices 3 and 6 now have degree 4
  const VertexCoverProblem p(g);
  const auto out = p.branch(g, kUnboundedValue);
  REQUIRE(out.kind == BranchOutcome<Graph, VertexSet>::Kind::Children);
  REQUIRE(out.children.size() == 2);
  const Graph h = reduced(g);
  const int u = *h.max_degree_vertex();
  CHECK(u == 3);
  CHECK(out.children[0].cover().test(u));
  CHECK_FALSE(out.children[0].has_vertex(u));
  for (int v : h.neighbors(u).members()) CHECK(out.children[1].cover().test(v));
  CHECK_FALSE(out.children[1].cover().test(u));
}

TEST_CASE("branch prunes when the partial cover reaches the bound") {
  Graph g = cycle(6);
  g.take(0);
  g.take(3);
  const VertexCoverProblem p(cycle(6));
  CHECK(p.branch(g, 2).kind == BranchOutcome<Graph, VertexSet>::Kind::Pruned);
  const Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto solved = VertexCoverProblem(star).branch(star, kUnboundedValue);
  REQUIRE(solved.kind == BranchOutcome<Graph, VertexSet>::Kind::Solution);
  CHECK(solved.solution->count() == 1);
}

TEST_CASE("mvc_sequential on known graphs") {
  CHECK(mvc_sequential(complete(3)).size == 2);
  CHECK(mvc_sequential(petersen()).size == 6);
  CHECK(subset_mvc(petersen()) == 6);
  CHECK(mvc_sequential(Graph(0)).size == 0);
  CHECK(mvc_sequential(Graph(4)).size == 0);
  const auto r = mvc_sequential(petersen());
  CHECK(petersen().is_cover(r.cover));
}

TEST_CASE("brute force oracle on known graphs") {
  CHECK(brute_force_mvc(complete(4)) == 3);
  CHECK(brute_force_mvc(cycle(6)) == 3);
  CHECK(brute_force_mvc(Graph::from_edges(2, {{0, 1}})) == 1);
  CHECK(brute_force_mvc(Graph(3)) == 0);
  CHECK_THROWS_AS(brute_force_mvc(Graph(27)), std::invalid_argument);
}

TEST_CASE("sequential, library oracle and subset oracle agree") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 120; ++i) {
    const int n = 4 + static_cast<int>(rng() % 13);
    const double p = std::array{0.1, 0.3, 0.6}[rng() % 3];
    const Graph g = gen_gnp(n, p, rng());
    const int expect = subset_mvc(g);
    INFO("n=" << n << " p=" << p);
    CHECK(brute_force_mvc(g) == expect);
    const auto r = mvc_sequential(g);
    CHECK(r.size == expect);
    CHECK(g.is_cover(r.cover));
    // Reduction keeps the optimum: kernel optimum plus forced vertices.
    const Graph k = reduced(g);
    CHECK(brute_force_mvc(k) + k.cover_size() == expect);
  }
}

TEST_CASE("basic encoding round trips random graphs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Graph g = gen_gnp(30, 0.2, seed);
    g.take(static_cast<int>(seed % 30));
    g.remove_vertex(static_cast<int>((seed + 7) % 30));
    const Bytes b = encode(g, Encoding::Basic);
    CHECK(b.size() == 4 + 31 * 4);
    CHECK(decode(b, Encoding::Basic) == g);
  }
}

TEST_CASE("optimized encoding keeps the induced subgraph") {
  Graph base = Graph::from_edges(5, {{1, 3}, {0, 1}, {3, 4}});
  Graph g = base;
  g.remove_vertex(0);
  g.remove_vertex(2);
  g.take(4);
  const Bytes b = encode(g, Encoding::Optimized);
  CHECK(b.size() == 2);
  const Graph d = decode(b, Encoding::Optimized, &base);
  CHECK(d == g);
  CHECK(d.edges() == std::vector<std::pair<int, int>>{{1, 3}});
}

TEST_CASE("optimized encoding round trips branch children") {
  const Graph base = gen_gnp(40, 0.15, 9);
  const VertexCoverProblem p(base, Encoding::Optimized);
  auto out = p.branch(base, kUnboundedValue);
  for (const auto& c : out.children) CHECK(p.deserialize(p.serialize(c)) == c);
}

TEST_CASE("optimized payload for n=1000 is 250 bytes, over 100x smaller than basic") {
  const Graph g = gen_gnp(1000, 0.5, 1);
  const auto opt = encode(g, Encoding::Optimized);
  const auto basic = encode(g, Encoding::Basic);
  CHECK(opt.size() == 250);
  CHECK(basic.size() == 4 + 1001 * 125);
  CHECK(basic.size() >= 100 * opt.size());
}

TEST_CASE("decoding rejects malformed payloads") {
  const Graph base = gen_gnp(12, 0.3, 2);
  Bytes opt = encode(base, Encoding::Optimized);
  CHECK_THROWS_AS(decode(Bytes(opt.begin(), opt.end() - 1), Encoding::Optimized, &base), FormatError);
  CHECK_THROWS_AS(decode(opt, Encoding::Optimized, nullptr), FormatError);
  Bytes padded = opt;
  padded[1] |= 0x80;  // vertex 15 does not exist
  CHECK_THROWS_AS(decode(padded, Encoding::Optimized, &base), FormatError);
  Bytes overlap = opt;
  overlap[2] |= 0x01;  // vertex 0 both present and covered
  CHECK_THROWS_AS(decode(overlap, Encoding::Optimized, &base), FormatError);
  Bytes basic = encode(base, Encoding::Basic);
  CHECK_THROWS_AS(decode(Bytes(basic.begin(), basic.end() - 1), Encoding::Basic), FormatError);
  CHECK_THROWS_AS(decode(Bytes{1, 0}, Encoding::Basic), FormatError);
}

TEST_CASE("solving from either decoded form takes the same number of nodes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph base = gen_gnp(24, 0.25, seed);
    const VertexCoverProblem basic(base, Encoding::Basic);
    const VertexCoverProblem opt(base, Encoding::Optimized);
    auto out = opt.branch(base, kUnboundedValue);
    for (const auto& child : out.children) {
      const Graph a = basic.deserialize(basic.serialize(child));
      const Graph b = opt.deserialize(opt.serialize(child));
      CHECK(solve_sequential(basic, a).nodes == solve_sequential(opt, b).nodes);
    }
  }
}

TEST_CASE("dimacs: path") {
  const auto d = parse_dimacs("p edge 3 2\ne 1 2\ne 2 3");
  CHECK(d.graph == path3());
  CHECK(d.warnings() == 0);
}

TEST_CASE("dimacs: self loops and duplicates are counted and skipped") {
  const auto d = parse_dimacs("c test\np edge 3 3\ne 1 1\ne 1 2\ne 2 1\n");
  CHECK(d.self_loops == 1);
  CHECK(d.duplicates == 1);
  CHECK(d.graph.edge_count() == 1);
}

TEST_CASE("dimacs: errors carry the line number") {
  try {
    (void)parse_dimacs("c x\ne 1 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    (void)parse_dimacs("p edge 3 1\n\ne 1 4\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_dimacs("c only comments\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p edge 3 1\ne 1 x\n"), ParseError);
}

TEST_CASE("dimacs: p_hat1000-2 sized file") {
  // The benchmark file itself is not shipped; this one has the same header
  // and edge count.
  std::ostringstream text;
  text << "c synthetic stand-in\np edge 1000 244799\n";
  std::mt19937_64 rng(1);
  std::vector<std::pair<int, int>> pairs;
  for (int u = 1; u <= 1000; ++u) {
    for (int v = u + 1; v <= 1000; ++v) pairs.emplace_back(u, v);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  for (std::size_t i = 0; i < 244799; ++i) text << "e " << pairs[i].first << ' ' << pairs[i].second << '\n';
  const auto d = parse_dimacs(text.str());
  CHECK(d.graph.universe() == 1000);
  CHECK(d.graph.edge_count() == 244799);
  CHECK(d.declared_edges == 244799);
}

TEST_CASE("dimacs: writer round trips") {
  const Graph g = gen_gnp(50, 0.1, 4);
  CHECK(parse_dimacs(to_dimacs(g, "seed 4")).graph == g);
}

TEST_CASE("gnp extremes and reproducibility") {
  CHECK(gen_gnp(20, 0.0, 1).edge_count() == 0);
  CHECK(gen_gnp(20, 1.0, 1).edge_count() == 190);
  CHECK(gen_gnp(60, 0.3, 5) == gen_gnp(60, 0.3, 5));
  CHECK_FALSE(gen_gnp(60, 0.3, 5) == gen_gnp(60, 0.3, 6));
  CHECK_THROWS_AS(gen_gnp(5, 1.5, 1), std::invalid_argument);
}

TEST_CASE("gnp mean edge count for n=600, p=4/599 is within 3 sigma of 1200") {
  const int n = 600;
  const double p = 4.0 / 599.0;
  const double pairs = n * (n - 1) / 2.0;
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) sum += static_cast<double>(gen_gnp(n, p, seed).edge_count());
  const double mean = sum / 100.0;
  const double sigma_mean = std::sqrt(pairs * p * (1 - p) / 100.0);
  CHECK(std::abs(pairs * p - 1200.0) < 1e-9);
  CHECK(std::abs(mean - 1200.0) <= 3 * sigma_mean);
}
