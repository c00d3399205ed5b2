#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "semilb/coordinator.hpp"

namespace semilb {

enum class WorkerStatus : std::uint8_t { Running, Available, Assigned };

enum class AssignmentPolicy : std::uint8_t { Random, Metadata };

/// Everything the semi-centralized center remembers. Its size depends on the
/// number of workers only, never on the number of tasks.
struct CenterState {
  CenterState(int workers, std::uint64_t seed, AssignmentPolicy policy = AssignmentPolicy::Random);

  int workers;
  std::vector<WorkerStatus> status;  // [1..p]
  BestTracker best;
  std::vector<std::optional<std::int64_t>> metadata;  // [1..p]
  /// feeds[s]: receivers s still owes a task, in assignment order.
  std::vector<std::vector<Rank>> feeds;
  /// fed_by[r]: the sender r is waiting on.
  std::vector<std::optional<Rank>> fed_by;
  AssignmentPolicy policy;
  std::mt19937_64 rng;
  CenterCounters counters;

  [[nodiscard]] WorkerStatus status_of(Rank r) const { return status.at(static_cast<std::size_t>(r.value)); }
  void set_status(Rank r, WorkerStatus s) { status.at(static_cast<std::size_t>(r.value)) = s; }
  [[nodiscard]] bool valid_worker(Rank r) const { return r.value >= 1 && r.value <= workers; }
  /// True when no worker is RUNNING (all AVAILABLE or ASSIGNED).
  [[nodiscard]] bool all_idle() const;

  /// Records that `sender` must feed `receiver`.
  void assign(Rank sender, Rank receiver);
  /// Drops the edge into `receiver`, if any.
  void clear_inbound(Rank receiver);
  /// True if following assignments from `from` reaches `target`.
  [[nodiscard]] bool chain_reaches(Rank from, Rank target) const;
  [[nodiscard]] bool assignments_acyclic() const;
  /// Largest number of edges into one worker.
  [[nodiscard]] std::size_t max_inbound() const;
};

/// Reacts to one worker message as the center loop does and returns what to send.
/// Termination traffic is handled by Center, not here.
std::vector<Outgoing> handle_center_message(CenterState& state, const Message& message);

/// Picks the RUNNING worker that should feed `requester`, skipping any whose
/// assignment would close a cycle. Uniformly random, or highest metadata.
std::optional<Rank> get_next_working_node(CenterState& state, Rank requester);

/// Startup waiting lists: result[i] is the ordered list of ranks worker i
/// feeds first (index 0 unused). Ranks 2..p each appear exactly once.
std::vector<std::vector<Rank>> build_waiting_lists(int max_branching, int workers);

/// Smallest d with max_branching^d >= workers.
int waiting_list_depth(int max_branching, int workers);

struct TerminationConfig {
  /// Seconds of quiet required before the vote. <= 0 disables the wait.
  double timeout_s = 20.0;
  bool use_timeout = true;
  /// Two consecutive all-accept rounds with equal, balanced task counters are
  /// required. Without it a single all-accept round terminates.
  bool confirm_with_counters = true;
};

struct CenterConfig {
  int workers = 1;
  int max_branching = 2;
  AssignmentPolicy policy = AssignmentPolicy::Random;
  std::uint64_t seed = 1;
  bool use_waiting_lists = true;
  TerminationConfig termination;
};

/// The semi-centralized center loop: brokers transfers, tracks the best
/// value, decides termination and finally fetches the winning solution.
class Center final : public Coordinator {
 public:
  enum class Phase : std::uint8_t { Running, Quiescing, Voting, Fetching, Done };

  explicit Center(CenterConfig config);

  void start(Endpoint& endpoint, double now) override;
  bool poll(Endpoint& endpoint, double now) override;
  [[nodiscard]] bool done() const override { return phase_ == Phase::Done; }
  [[nodiscard]] std::optional<double> wake_time() const override;
  [[nodiscard]] FinalResult result() const override;
  [[nodiscard]] Value best_value() const override { return state_.best.value; }
  [[nodiscard]] std::uint64_t termination_attempts() const override {
    return state_.counters.termination_attempts;
  }

  [[nodiscard]] Phase phase() const { return phase_; }
  [[nodiscard]] const CenterState& state() const { return state_; }
  [[nodiscard]] std::optional<TerminationDecision> last_decision() const { return last_decision_; }

 private:
  void emit(Endpoint& endpoint, const Outgoing& out);
  void begin_termination(Endpoint& endpoint, double now);
  void start_vote(Endpoint& endpoint);
  void conclude_vote(Endpoint& endpoint);
  void finish(Endpoint& endpoint);

  CenterConfig config_;
  CenterState state_;
  Phase phase_ = Phase::Running;
  double deadline_ = 0.0;

  int replies_ = 0;
  bool refused_ = false;
  bool dirty_ = false;
  std::int64_t round_sent_ = 0;
  std::int64_t round_received_ = 0;
  std::optional<std::pair<std::int64_t, std::int64_t>> previous_round_;
  std::optional<TerminationDecision> last_decision_;
  std::optional<Bytes> solution_;
};

}  // namespace semilb
