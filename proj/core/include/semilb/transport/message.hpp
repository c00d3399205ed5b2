#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "semilb/types.hpp"

namespace semilb {

// Codes are part of the wire format and must never be renumbered.
enum class Tag : std::uint8_t {
  BestvalUpdate = 0x01,    // 8-byte value
  Available = 0x02,        // empty
  StartedRunning = 0x03,   // empty
  Metadata = 0x04,         // 8-byte priority
  SendWork = 0x05,         // 2-byte destination rank
  Work = 0x06,             // serialized task (empty = seed)
  TaskAck = 0x07,          // empty
  Terminate = 0x08,        // empty
  TerminateRefuse = 0x09,  // empty
  TaskPush = 0x10,         // 8-byte priority + serialized task
  QueueFull = 0x11,        // empty
  QueueOpen = 0x12,        // empty
  TerminateAccept = 0x13,  // 8-byte tasks sent + 8-byte tasks received
  Shutdown = 0x14,         // empty
  SolutionRequest = 0x15,  // empty
  Solution = 0x16,         // 8-byte value + serialized solution
};

inline constexpr std::size_t kDefaultMaxPayload = std::size_t{64} << 20;

/// [1B tag][2B source rank LE][4B payload length LE]
inline constexpr std::size_t kFrameHeaderSize = 7;

struct Message {
  Tag tag{};
  Rank source{};
  Bytes payload;

  bool operator==(const Message&) const = default;
};

/// Raised for malformed frames or payloads. Carries the offending header bytes
/// when the failure was detected while decoding a frame.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what, Bytes header = {})
      : std::runtime_error(what), header_(std::move(header)) {}

  [[nodiscard]] const Bytes& header() const { return header_; }

 private:
  Bytes header_;
};

[[nodiscard]] bool is_known_tag(std::uint8_t code);
[[nodiscard]] std::string_view tag_name(Tag tag);
inline constexpr std::size_t kTagCount = 16;
/// Dense index in [0, kTagCount) for per-tag counters.
[[nodiscard]] std::size_t tag_index(Tag tag);
[[nodiscard]] Tag tag_from_index(std::size_t index);

/// Throws ProtocolError when `length` does not fit the schema of `tag`.
void validate_payload(Tag tag, std::size_t length, std::size_t max_payload = kDefaultMaxPayload);

[[nodiscard]] Bytes encode_frame(const Message& message);

struct DecodedFrame {
  Message message;
  std::size_t consumed = 0;
};

/// Decodes one frame from the front of `buffer`. Returns nullopt if the buffer
/// does not yet hold a complete frame.
[[nodiscard]] std::optional<DecodedFrame> decode_frame(
    std::span<const std::uint8_t> buffer, std::size_t max_payload = kDefaultMaxPayload);

namespace payload {

void put_i64(Bytes& out, std::int64_t value);
void put_u16(Bytes& out, std::uint16_t value);
void put_u32(Bytes& out, std::uint32_t value);
[[nodiscard]] std::int64_t get_i64(std::span<const std::uint8_t> in, std::size_t offset = 0);
[[nodiscard]] std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t offset = 0);
[[nodiscard]] std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset = 0);

[[nodiscard]] Bytes value(Value v);
[[nodiscard]] Bytes rank(Rank r);
[[nodiscard]] Bytes task_push(Value priority, std::span<const std::uint8_t> task);
[[nodiscard]] Bytes counters(std::int64_t sent, std::int64_t received);
[[nodiscard]] Bytes solution(Value v, std::span<const std::uint8_t> encoded);

[[nodiscard]] Value as_value(const Message& m);
[[nodiscard]] Rank as_rank(const Message& m);
[[nodiscard]] std::pair<std::int64_t, std::int64_t> as_counters(const Message& m);
/// Tail after the 8-byte prefix of TaskPush and Solution payloads.
[[nodiscard]] std::span<const std::uint8_t> tail_after_value(const Message& m);

}  // namespace payload

}  // namespace semilb
