#include "semilb/vcover/encoding.hpp"

#include <string>

#include "semilb/transport/message.hpp"

namespace semilb::vc {

namespace {

std::size_t row_bytes(int n) { return (static_cast<std::size_t>(n) + 7) / 8; }

void put_bits(Bytes& out, const std::uint64_t* words, int n) {
  const std::size_t start = out.size();
  out.resize(start + row_bytes(n), 0);
  for (std::size_t b = 0; b < row_bytes(n); ++b) {
    out[start + b] = static_cast<std::uint8_t>(words[b / 8] >> ((b % 8) * 8));
  }
}

void get_bits(std::span<const std::uint8_t> in, std::uint64_t* words, int n) {
  const std::size_t nb = row_bytes(n);
  for (std::size_t b = 0; b < nb; ++b) {
    words[b / 8] |= static_cast<std::uint64_t>(in[b]) << ((b % 8) * 8);
  }
  if (n % 8 != 0 && (in[nb - 1] >> (n % 8)) != 0) throw FormatError("nonzero padding bits");
}

}  // namespace

std::string_view encoding_name(Encoding e) { return e == Encoding::Basic ? "basic" : "optimized"; }

Encoding parse_encoding(std::string_view name) {
  if (name == "basic") return Encoding::Basic;
  if (name == "optimized") return Encoding::Optimized;
  throw std::invalid_argument("unknown encoding '" + std::string(name) + "'");
}

Bytes encode_set(const VertexSet& s) {
  Bytes out;
  put_bits(out, s.words().data(), s.universe());
  return out;
}

VertexSet decode_set(std::span<const std::uint8_t> bytes, int universe) {
  if (bytes.size() != row_bytes(universe)) {
    throw FormatError("vertex set of " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(row_bytes(universe)));
  }
  VertexSet s(universe);
  get_bits(bytes, s.words().data(), universe);
  return s;
}

Bytes encode(const Graph& g, Encoding encoding) {
  const int n = g.universe();
  Bytes out;
  if (encoding == Encoding::Optimized) {
    out.reserve(2 * row_bytes(n));
    put_bits(out, g.present().words().data(), n);
    put_bits(out, g.cover().words().data(), n);
    return out;
  }
  out.reserve(4 + (static_cast<std::size_t>(n) + 1) * row_bytes(n));
  payload::put_u32(out, static_cast<std::uint32_t>(n));
  std::vector<std::uint64_t> scratch(static_cast<std::size_t>(g.words_per_row()));
  for (int v = 0; v < n; ++v) {
    const std::uint64_t* r = g.row(v);
    std::copy(r, r + g.words_per_row(), scratch.begin());
    if (g.has_vertex(v)) scratch[static_cast<std::size_t>(v) >> 6] |= std::uint64_t{1} << (v & 63);
    put_bits(out, scratch.data(), n);
  }
  put_bits(out, g.cover().words().data(), n);
  return out;
}

Graph decode(std::span<const std::uint8_t> bytes, Encoding encoding, const Graph* base) {
  if (encoding == Encoding::Optimized) {
    if (base == nullptr) throw FormatError("optimized decoding needs the startup graph");
    const int n = base->universe();
    if (bytes.size() != 2 * row_bytes(n)) {
      throw FormatError("optimized task of " + std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(2 * row_bytes(n)) + " for n=" + std::to_string(n));
    }
    const VertexSet present = decode_set(bytes.first(row_bytes(n)), n);
    VertexSet cover = decode_set(bytes.subspan(row_bytes(n)), n);
    if (cover.intersects(present)) throw FormatError("cover overlaps present vertices");
    Graph g = base->induced(present);
    g.set_cover(std::move(cover));
    return g;
  }

  if (bytes.size() < 4) throw FormatError("basic task shorter than its header");
  const std::uint32_t n32 = payload::get_u32(bytes, 0);
  if (n32 > (1U << 20)) throw FormatError("basic task with implausible n=" + std::to_string(n32));
  const int n = static_cast<int>(n32);
  const std::size_t rb = row_bytes(n);
  if (bytes.size() != 4 + (static_cast<std::size_t>(n) + 1) * rb) {
    throw FormatError("basic task of " + std::to_string(bytes.size()) + " bytes does not match n=" +
                      std::to_string(n));
  }
  if (base != nullptr && base->universe() != n) throw FormatError("basic task universe differs from base graph");

  Graph g(n);
  std::vector<std::uint64_t> scratch(static_cast<std::size_t>(VertexSet::word_count(n)));
  std::vector<std::vector<std::uint64_t>> rows(static_cast<std::size_t>(n));
  VertexSet present(n);
  for (int v = 0; v < n; ++v) {
    std::fill(scratch.begin(), scratch.end(), 0);
    get_bits(bytes.subspan(4 + static_cast<std::size_t>(v) * rb, rb), scratch.data(), n);
    const std::uint64_t diag = std::uint64_t{1} << (v & 63);
    if (scratch[static_cast<std::size_t>(v) >> 6] & diag) {
      present.set(v);
      scratch[static_cast<std::size_t>(v) >> 6] &= ~diag;
    }
    rows[static_cast<std::size_t>(v)] = scratch;
  }
  for (int v = 0; v < n; ++v) {
    if (!present.test(v)) g.remove_vertex(v);
  }
  for (int u = 0; u < n; ++u) {
    VertexSet row(n);
    row.words() = rows[static_cast<std::size_t>(u)];
    bool bad = false;
    row.for_each([&](int v) {
      if (bad) return;
      if (!present.test(u) || !present.test(v) || !((rows[static_cast<std::size_t>(v)][static_cast<std::size_t>(u) >> 6] >> (u & 63)) & 1U)) {
        bad = true;
        return;
      }
      if (u < v) g.add_edge(u, v);
    });
    if (bad) throw FormatError("basic task adjacency is not a symmetric graph on present vertices");
  }
  VertexSet cover = decode_set(bytes.subspan(4 + static_cast<std::size_t>(n) * rb), n);
  if (cover.intersects(present)) throw FormatError("cover overlaps present vertices");
  g.set_cover(std::move(cover));
  return g;
}

}  // namespace semilb::vc
