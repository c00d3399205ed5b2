#pragma once

#include <span>
#include <stdexcept>
#include <string_view>

#include "semilb/types.hpp"
#include "semilb/vcover/graph.hpp"

namespace semilb::vc {

enum class Encoding : std::uint8_t { Basic, Optimized };

[[nodiscard]] std::string_view encoding_name(Encoding e);
[[nodiscard]] Encoding parse_encoding(std::string_view name);

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basic:     [4B n LE][n rows of ceil(n/8) bytes][cover, ceil(n/8) bytes]
///            A set diagonal bit marks a present vertex.
/// Optimized: [present, ceil(n/8) bytes][cover, ceil(n/8) bytes]
/// Bit v lives in byte v/8 at position v%8.
[[nodiscard]] Bytes encode(const Graph& g, Encoding encoding);

/// `base` is the graph loaded at startup; required for Optimized.
[[nodiscard]] Graph decode(std::span<const std::uint8_t> bytes, Encoding encoding, const Graph* base = nullptr);

[[nodiscard]] Bytes encode_set(const VertexSet& s);
[[nodiscard]] VertexSet decode_set(std::span<const std::uint8_t> bytes, int universe);

}  // namespace semilb::vc
