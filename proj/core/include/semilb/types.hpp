#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace semilb {

using Bytes = std::vector<std::uint8_t>;

/// Objective value. Every problem is phrased as a minimization.
using Value = std::int64_t;
inline constexpr Value kUnboundedValue = std::numeric_limits<Value>::max();

/// Process index: 0 is the center, 1..p are workers.
struct Rank {
  int value = 0;

  constexpr auto operator<=>(const Rank&) const = default;
  [[nodiscard]] constexpr bool is_center() const { return value == 0; }
};

inline constexpr Rank kCenterRank{0};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A framework invariant was broken by the caller (or by the framework itself).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace semilb
