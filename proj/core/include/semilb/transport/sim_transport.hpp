#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "semilb/transport/endpoint.hpp"

namespace semilb {

struct SimNetworkConfig {
  int min_delay = 1;  // ticks
  int max_delay = 10;
  std::uint64_t seed = 42;
  std::size_t max_payload = kDefaultMaxPayload;
  bool record_trace = false;
};

/// Optional hook that replaces the drawn delay of one message. Returning
/// nullopt keeps the seeded draw. Used to stage adversarial schedules.
using DelayOverride =
    std::function<std::optional<int>(const Message& message, Rank dest, int drawn_delay)>;

class SimNetwork;

class SimEndpoint final : public Endpoint {
 public:
  SimEndpoint(SimNetwork& network, Rank rank) : network_(&network), rank_(rank) {}

  [[nodiscard]] Rank rank() const override { return rank_; }
  [[nodiscard]] int worker_count() const override;
  void send_async(Rank dest, Tag tag, Bytes payload) override;
  [[nodiscard]] std::optional<Message> try_receive() override;
  std::vector<Delivery> sim_advance(int ticks) override;

  void close() { closed_ = true; }
  [[nodiscard]] bool has_pending() const { return !inbox_.empty(); }

 private:
  friend class SimNetwork;

  SimNetwork* network_;
  Rank rank_;
  bool closed_ = false;
  std::deque<Message> inbox_;
};

/// Deterministic in-process message fabric driven by a virtual clock.
///
/// Each message gets a uniform delay in [min_delay, max_delay] from a seeded
/// generator; per-pair FIFO is kept by never scheduling a message before the
/// previous one of the same (sender, receiver) pair. Messages due on the same
/// tick are delivered by (tick, sender, sequence).
class SimNetwork {
 public:
  SimNetwork(int workers, SimNetworkConfig config = {});

  SimNetwork(const SimNetwork&) = delete;
  SimNetwork& operator=(const SimNetwork&) = delete;

  [[nodiscard]] SimEndpoint& endpoint(Rank rank);
  [[nodiscard]] int worker_count() const { return workers_; }
  [[nodiscard]] std::int64_t now() const { return now_; }

  std::vector<Delivery> advance(int ticks);
  /// Jumps to `tick` (no-op if already past), delivering everything due.
  std::vector<Delivery> advance_to(std::int64_t tick);

  [[nodiscard]] std::optional<std::int64_t> next_delivery_tick() const;
  [[nodiscard]] std::size_t in_flight() const { return in_flight_.size(); }
  [[nodiscard]] std::size_t in_flight(Tag tag) const;
  [[nodiscard]] bool idle() const;

  void set_delay_override(DelayOverride hook) { override_ = std::move(hook); }
  [[nodiscard]] const std::vector<Delivery>& trace() const { return trace_; }
  [[nodiscard]] std::uint64_t messages_sent() const { return sequence_; }

 private:
  friend class SimEndpoint;

  using Key = std::tuple<std::int64_t, int, std::uint64_t>;  // tick, sender, seq
  struct InFlight {
    Rank dest;
    Tag tag;
    Bytes frame;
  };

  void post(Rank source, Rank dest, Tag tag, Bytes payload);
  void deliver_due(std::vector<Delivery>& out);

  int workers_;
  SimNetworkConfig config_;
  std::mt19937_64 rng_;
  std::int64_t now_ = 0;
  std::uint64_t sequence_ = 0;
  std::vector<std::unique_ptr<SimEndpoint>> endpoints_;
  std::vector<std::int64_t> last_tick_;  // indexed by sender * (p+1) + dest
  std::map<Key, InFlight> in_flight_;
  DelayOverride override_;
  std::vector<Delivery> trace_;
};

}  // namespace semilb
