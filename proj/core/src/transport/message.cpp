#include "semilb/transport/message.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

namespace semilb {

namespace {

struct Schema {
  std::size_t min = 0;
  std::size_t max = 0;  // 0 with variable=true means "up to max_payload"
  bool variable = false;
};

constexpr std::array<Tag, kTagCount> kAllTags = {
    Tag::BestvalUpdate, Tag::Available,       Tag::StartedRunning,  Tag::Metadata,
    Tag::SendWork,      Tag::Work,            Tag::TaskAck,         Tag::Terminate,
    Tag::TerminateRefuse, Tag::TaskPush,      Tag::QueueFull,       Tag::QueueOpen,
    Tag::TerminateAccept, Tag::Shutdown,      Tag::SolutionRequest, Tag::Solution,
};

Schema schema_of(Tag tag) {
  switch (tag) {
    case Tag::BestvalUpdate:
    case Tag::Metadata:
      return {8, 8, false};
    case Tag::SendWork:
      return {2, 2, false};
    case Tag::Work:
      return {0, 0, true};
    case Tag::TaskPush:
    case Tag::Solution:
      return {8, 0, true};
    case Tag::TerminateAccept:
      return {16, 16, false};
    case Tag::Available:
    case Tag::StartedRunning:
    case Tag::TaskAck:
    case Tag::Terminate:
    case Tag::TerminateRefuse:
    case Tag::QueueFull:
    case Tag::QueueOpen:
    case Tag::Shutdown:
    case Tag::SolutionRequest:
      return {0, 0, false};
  }
  return {0, 0, false};
}

}  // namespace

bool is_known_tag(std::uint8_t code) {
  for (Tag t : kAllTags) {
    if (static_cast<std::uint8_t>(t) == code) return true;
  }
  return false;
}

std::size_t tag_index(Tag tag) {
  for (std::size_t i = 0; i < kAllTags.size(); ++i) {
    if (kAllTags[i] == tag) return i;
  }
  throw ProtocolError("unknown tag code " + std::to_string(static_cast<int>(tag)));
}

Tag tag_from_index(std::size_t index) { return kAllTags.at(index); }

std::string_view tag_name(Tag tag) {
  switch (tag) {
    case Tag::BestvalUpdate: return "BESTVAL_UPDATE";
    case Tag::Available: return "AVAILABLE";
    case Tag::StartedRunning: return "STARTED_RUNNING";
    case Tag::Metadata: return "METADATA";
    case Tag::SendWork: return "SEND_WORK";
    case Tag::Work: return "WORK";
    case Tag::TaskAck: return "TASK_ACK";
    case Tag::Terminate: return "TERMINATE";
    case Tag::TerminateRefuse: return "TERMINATE_REFUSE";
    case Tag::TaskPush: return "TASK_PUSH";
    case Tag::QueueFull: return "QUEUE_FULL";
    case Tag::QueueOpen: return "QUEUE_OPEN";
    case Tag::TerminateAccept: return "TERMINATE_ACCEPT";
    case Tag::Shutdown: return "SHUTDOWN";
    case Tag::SolutionRequest: return "SOLUTION_REQUEST";
    case Tag::Solution: return "SOLUTION";
  }
  return "UNKNOWN";
}

void validate_payload(Tag tag, std::size_t length, std::size_t max_payload) {
  if (!is_known_tag(static_cast<std::uint8_t>(tag))) {
    throw ProtocolError("unknown tag code " + std::to_string(static_cast<int>(tag)));
  }
  if (length > max_payload) {
    throw ProtocolError(std::string(tag_name(tag)) + ": payload of " + std::to_string(length) +
                        " bytes exceeds limit " + std::to_string(max_payload));
  }
  const Schema s = schema_of(tag);
  const bool ok = s.variable ? length >= s.min : (length >= s.min && length <= s.max);
  if (!ok) {
    throw ProtocolError(std::string(tag_name(tag)) + ": payload length " + std::to_string(length) +
                        " does not match schema");
  }
}

Bytes encode_frame(const Message& message) {
  validate_payload(message.tag, message.payload.size(), std::numeric_limits<std::uint32_t>::max());
  if (message.source.value < 0 || message.source.value > 0xFFFF) {
    throw ProtocolError("source rank out of range: " + std::to_string(message.source.value));
  }
  Bytes out;
  out.reserve(kFrameHeaderSize + message.payload.size());
  out.push_back(static_cast<std::uint8_t>(message.tag));
  payload::put_u16(out, static_cast<std::uint16_t>(message.source.value));
  payload::put_u32(out, static_cast<std::uint32_t>(message.payload.size()));
  out.insert(out.end(), message.payload.begin(), message.payload.end());
  return out;
}

std::optional<DecodedFrame> decode_frame(std::span<const std::uint8_t> buffer,
                                         std::size_t max_payload) {
  if (buffer.empty()) return std::nullopt;
  // The tag is checked as soon as it is visible so garbage is reported early.
  if (!is_known_tag(buffer[0])) {
    Bytes header(buffer.begin(),
                 buffer.begin() + static_cast<std::ptrdiff_t>(std::min(buffer.size(), kFrameHeaderSize)));
    throw ProtocolError("unknown tag code " + std::to_string(buffer[0]), std::move(header));
  }
  if (buffer.size() < kFrameHeaderSize) return std::nullopt;

  const auto tag = static_cast<Tag>(buffer[0]);
  const std::uint16_t source = payload::get_u16(buffer, 1);
  const std::uint32_t length = payload::get_u32(buffer, 3);
  try {
    validate_payload(tag, length, max_payload);
  } catch (const ProtocolError& e) {
    throw ProtocolError(e.what(), Bytes(buffer.begin(), buffer.begin() + kFrameHeaderSize));
  }
  if (buffer.size() < kFrameHeaderSize + length) return std::nullopt;

  DecodedFrame frame;
  frame.message.tag = tag;
  frame.message.source = Rank{source};
  frame.message.payload.assign(buffer.begin() + kFrameHeaderSize,
                               buffer.begin() + static_cast<std::ptrdiff_t>(kFrameHeaderSize + length));
  frame.consumed = kFrameHeaderSize + length;
  return frame;
}

namespace payload {

void put_i64(Bytes& out, std::int64_t value) {
  auto u = static_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

void put_u16(Bytes& out, std::uint16_t value) {
  out.push_back(static_cast<std::uint8_t>(value));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
}

void put_u32(Bytes& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::int64_t get_i64(std::span<const std::uint8_t> in, std::size_t offset) {
  if (in.size() < offset + 8) throw ProtocolError("truncated 8-byte field");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t{in[offset + static_cast<std::size_t>(i)]} << (8 * i);
  return static_cast<std::int64_t>(u);
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t offset) {
  if (in.size() < offset + 2) throw ProtocolError("truncated 2-byte field");
  return static_cast<std::uint16_t>(in[offset] | (in[offset + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  if (in.size() < offset + 4) throw ProtocolError("truncated 4-byte field");
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= std::uint32_t{in[offset + static_cast<std::size_t>(i)]} << (8 * i);
  return u;
}

Bytes value(Value v) {
  Bytes out;
  put_i64(out, v);
  return out;
}

Bytes rank(Rank r) {
  if (r.value < 0 || r.value > 0xFFFF) throw ProtocolError("rank out of range");
  Bytes out;
  put_u16(out, static_cast<std::uint16_t>(r.value));
  return out;
}

Bytes task_push(Value priority, std::span<const std::uint8_t> task) {
  Bytes out;
  out.reserve(8 + task.size());
  put_i64(out, priority);
  out.insert(out.end(), task.begin(), task.end());
  return out;
}

Bytes counters(std::int64_t sent, std::int64_t received) {
  Bytes out;
  put_i64(out, sent);
  put_i64(out, received);
  return out;
}

Bytes solution(Value v, std::span<const std::uint8_t> encoded) { return task_push(v, encoded); }

Value as_value(const Message& m) { return get_i64(m.payload); }

Rank as_rank(const Message& m) { return Rank{get_u16(m.payload)}; }

std::pair<std::int64_t, std::int64_t> as_counters(const Message& m) {
  return {get_i64(m.payload, 0), get_i64(m.payload, 8)};
}

std::span<const std::uint8_t> tail_after_value(const Message& m) {
  if (m.payload.size() < 8) throw ProtocolError("payload shorter than its value prefix");
  return std::span<const std::uint8_t>(m.payload).subspan(8);
}

}  // namespace payload

}  // namespace semilb
