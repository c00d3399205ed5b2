#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "semilb/transport/message.hpp"

namespace semilb {

/// A message handed to its destination by the simulated network.
struct Delivery {
  std::int64_t tick = 0;
  Rank dest{};
  Message message;

  bool operator==(const Delivery&) const = default;
};

/// One rank's view of the message fabric. Sends never wait for the peer, and
/// messages between an ordered pair of ranks are delivered in send order.
///
/// An endpoint is driven by a single communication loop; it is not safe to
/// call it from several threads at once.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  [[nodiscard]] virtual Rank rank() const = 0;
  /// Number of worker ranks p; valid ranks are 0..p.
  [[nodiscard]] virtual int worker_count() const = 0;

  virtual void send_async(Rank dest, Tag tag, Bytes payload) = 0;
  [[nodiscard]] virtual std::optional<Message> try_receive() = 0;

  /// Advances virtual time. Only the simulated transport supports this.
  virtual std::vector<Delivery> sim_advance(int ticks);

  /// Sends a copy of `payload` to every worker 1..p. Center only.
  void broadcast_async(Tag tag, const Bytes& payload);
};

}  // namespace semilb
