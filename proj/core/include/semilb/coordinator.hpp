#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "semilb/transport/endpoint.hpp"

namespace semilb {

/// A message the coordinator wants sent. `broadcast` means every worker 1..p.
struct Outgoing {
  Rank dest{};
  Tag tag{};
  Bytes payload;
  bool broadcast = false;

  bool operator==(const Outgoing&) const = default;
};

enum class TerminationDecision : std::uint8_t { Terminate, Resume };

struct CenterCounters {
  std::array<std::uint64_t, kTagCount> received{};
  std::array<std::uint64_t, kTagCount> sent{};
  std::uint64_t reassignments = 0;
  std::uint64_t termination_attempts = 0;
  std::uint64_t termination_cancellations = 0;
  std::uint64_t vote_rounds = 0;
  std::uint64_t bestval_broadcasts = 0;
  std::uint64_t failed_requests = 0;

  [[nodiscard]] std::uint64_t received_of(Tag t) const { return received[tag_index(t)]; }
  [[nodiscard]] std::uint64_t sent_of(Tag t) const { return sent[tag_index(t)]; }
};

/// Global best value and who holds the matching solution.
struct BestTracker {
  Value value = kUnboundedValue;
  std::optional<Rank> holder;
  std::vector<Value> trace;  // every accepted improvement, in order

  /// True if `v` improves the best value; the caller then broadcasts it.
  bool offer(Value v, Rank from) {
    if (v >= value) return false;
    value = v;
    holder = from;
    trace.push_back(v);
    return true;
  }
};

struct FinalResult {
  Value best_value = kUnboundedValue;
  std::optional<Rank> best_holder;
  std::optional<Bytes> solution;  // as serialized by the holder
  CenterCounters counters;
  std::vector<Value> best_trace;
  std::int64_t tasks_sent = 0;      // worker-to-worker transfers (semi) or pushes (central)
  std::int64_t tasks_received = 0;
  std::size_t max_queue_size = 0;   // central only
  std::vector<Tag> flag_broadcasts;  // central only: QueueFull / QueueOpen, in order
};

/// The center-side loop shared by both schedulers. `now` is seconds on
/// whatever clock drives the run (virtual in simulation).
class Coordinator {
 public:
  virtual ~Coordinator() = default;

  virtual void start(Endpoint& endpoint, double now) = 0;
  /// Drains the inbox and advances internal state. Returns true if any
  /// message was processed.
  virtual bool poll(Endpoint& endpoint, double now) = 0;
  [[nodiscard]] virtual bool done() const = 0;
  /// Earliest time at which poll has timed work to do even without messages.
  [[nodiscard]] virtual std::optional<double> wake_time() const = 0;
  [[nodiscard]] virtual FinalResult result() const = 0;
  [[nodiscard]] virtual Value best_value() const = 0;
  [[nodiscard]] virtual std::uint64_t termination_attempts() const = 0;
};

/// Drives a coordinator on the steady clock until it finishes.
FinalResult run_coordinator(Coordinator& coordinator, Endpoint& endpoint,
                            std::chrono::microseconds idle_sleep = std::chrono::microseconds(200));

}  // namespace semilb
