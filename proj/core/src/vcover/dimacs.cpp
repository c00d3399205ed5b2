#include "semilb/vcover/dimacs.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace semilb::vc {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::int64_t number(std::string_view token, int line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, "expected an integer, got '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

DimacsGraph parse_dimacs(std::string_view text) {
  DimacsGraph out;
  bool have_header = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tok = split(line);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "p") {
      if (have_header) throw ParseError(line_no, "second problem line");
      if (tok.size() != 4) throw ParseError(line_no, "problem line must be 'p edge n m'");
      const std::int64_t n = number(tok[2], line_no);
      if (n < 0 || n > (1 << 20)) throw ParseError(line_no, "vertex count out of range");
      out.declared_edges = number(tok[3], line_no);
      out.graph = Graph(static_cast<int>(n));
      have_header = true;
    } else if (tok[0] == "e") {
      if (!have_header) throw ParseError(line_no, "edge before the problem line");
      if (tok.size() != 3) throw ParseError(line_no, "edge line must be 'e u v'");
      const std::int64_t u = number(tok[1], line_no);
      const std::int64_t v = number(tok[2], line_no);
      const int n = out.graph.universe();
      if (u < 1 || u > n || v < 1 || v > n) {
        throw ParseError(line_no, "vertex out of range 1.." + std::to_string(n));
      }
      if (u == v) {
        ++out.self_loops;
      } else if (!out.graph.add_edge(static_cast<int>(u - 1), static_cast<int>(v - 1))) {
        ++out.duplicates;
      }
    } else {
      throw ParseError(line_no, "unknown line type '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_header) throw ParseError(line_no, "missing problem line");
  return out;
}

DimacsGraph load_dimacs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dimacs(buffer.str());
}

std::string to_dimacs(const Graph& g, std::string_view comment) {
  std::ostringstream out;
  if (!comment.empty()) out << "c " << comment << '\n';
  out << "p edge " << g.universe() << ' ' << g.edge_count() << '\n';
  for (auto [u, v] : g.edges()) out << "e " << u + 1 << ' ' << v + 1 << '\n';
  return out.str();
}

}  // namespace semilb::vc
