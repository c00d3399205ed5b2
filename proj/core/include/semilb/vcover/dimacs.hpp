#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semilb/vcover/graph.hpp"

namespace semilb::vc {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

struct DimacsGraph {
  Graph graph;
  std::int64_t declared_edges = 0;
  int self_loops = 0;
  int duplicates = 0;

  [[nodiscard]] int warnings() const { return self_loops + duplicates; }
};

/// Reads the DIMACS edge format: "c" comments, one "p edge n m" line, then
/// "e u v" lines with 1-based vertices. Self loops and repeated edges are
/// skipped and counted.
DimacsGraph parse_dimacs(std::string_view text);
DimacsGraph load_dimacs(const std::filesystem::path& path);

/// Writes g (present vertices keep their indices) in the same format.
std::string to_dimacs(const Graph& g, std::string_view comment = {});

}  // namespace semilb::vc
