#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <vector>

#include "semilb/center.hpp"

namespace semilb {

enum class QueueFlag : std::uint8_t { Open, Full };

enum class PushDecision : std::uint8_t { PushToCenter, KeepLocal };

/// What a worker does with a freshly registered task under the baseline.
[[nodiscard]] PushDecision worker_push_policy(QueueFlag last_known_flag);

struct CentralConfig {
  int workers = 1;
  std::int64_t tasks_per_worker = 1000;          // c
  std::uint64_t memory_limit = 10ULL << 30;      // bytes of stored payload
  double hysteresis = 0.9;
  bool fifo = false;
};

struct QueuedTask {
  Value priority = 0;
  std::uint64_t sequence = 0;
  Bytes task;
};

/// The baseline center's task store plus worker statuses.
class CentralQueueState {
 public:
  explicit CentralQueueState(CentralConfig config);

  /// Stores a pushed task; returns the flag transition it caused, if any.
  std::optional<QueueFlag> push(Value priority, Bytes task);
  /// Highest priority first (or oldest first in FIFO mode).
  std::optional<QueuedTask> pop();

  /// Re-evaluates the flag and returns the transition, if any.
  std::optional<QueueFlag> update_flag();

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] bool empty() const { return size_ == 0; }
  [[nodiscard]] std::uint64_t bytes() const { return bytes_; }
  [[nodiscard]] std::int64_t task_limit() const { return task_limit_; }
  [[nodiscard]] QueueFlag flag() const { return flag_; }
  [[nodiscard]] std::size_t max_size() const { return max_size_; }
  [[nodiscard]] const CentralConfig& config() const { return config_; }

  int workers;
  /// RUNNING or AVAILABLE; index 0 unused.
  std::vector<WorkerStatus> status;
  /// Dispatched WORK not yet acknowledged.
  std::int64_t in_flight = 0;
  std::vector<Tag> flag_history;

 private:
  struct Order {
    bool fifo;
    bool operator()(const QueuedTask& a, const QueuedTask& b) const {
      if (fifo || a.priority == b.priority) return a.sequence > b.sequence;
      return a.priority < b.priority;
    }
  };

  CentralConfig config_;
  std::int64_t task_limit_;
  std::priority_queue<QueuedTask, std::vector<QueuedTask>, Order> queue_;
  std::size_t size_ = 0;
  std::uint64_t bytes_ = 0;
  std::uint64_t sequence_ = 0;
  QueueFlag flag_ = QueueFlag::Open;
  std::size_t max_size_ = 0;
};

/// Sends queued tasks to AVAILABLE workers (lowest rank first) and broadcasts
/// flag transitions caused by the pops.
std::vector<Outgoing> center_dispatch(CentralQueueState& state);

[[nodiscard]] TerminationDecision central_termination(const CentralQueueState& state);

/// The fully centralized baseline center.
class CentralCenter final : public Coordinator {
 public:
  explicit CentralCenter(CentralConfig config);

  void start(Endpoint& endpoint, double now) override;
  bool poll(Endpoint& endpoint, double now) override;
  [[nodiscard]] bool done() const override { return phase_ == Phase::Done; }
  [[nodiscard]] std::optional<double> wake_time() const override { return std::nullopt; }
  [[nodiscard]] FinalResult result() const override;
  [[nodiscard]] Value best_value() const override { return best_.value; }
  [[nodiscard]] std::uint64_t termination_attempts() const override {
    return counters_.termination_attempts;
  }

  [[nodiscard]] const CentralQueueState& state() const { return state_; }

 private:
  enum class Phase : std::uint8_t { Running, Fetching, Done };

  void emit(Endpoint& endpoint, const Outgoing& out);
  void finish(Endpoint& endpoint);

  CentralQueueState state_;
  BestTracker best_;
  CenterCounters counters_;
  Phase phase_ = Phase::Running;
  std::int64_t pushes_ = 0;
  std::optional<Bytes> solution_;
};

}  // namespace semilb
