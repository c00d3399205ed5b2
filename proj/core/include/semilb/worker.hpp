#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "semilb/central.hpp"
#include "semilb/problem.hpp"
#include "semilb/task_tree.hpp"
#include "semilb/transport/endpoint.hpp"

namespace semilb {

enum class SchedulerMode : std::uint8_t { SemiCentralized, Centralized };

enum class WorkerPhase : std::uint8_t { Idle, Running, Terminating };

struct WorkerConfig {
  SchedulerMode mode = SchedulerMode::SemiCentralized;
  int threads = 1;  // exploration threads
  bool emit_metadata = false;
  /// Refuse TERMINATE while sent tasks are unacknowledged.
  bool refuse_with_unacked = true;
  /// Refuse TERMINATE while still exploring.
  bool refuse_while_running = true;
  std::chrono::microseconds idle_sleep{1000};
  /// Sub-instances at or below this priority are never handed out. 0 = off.
  std::int64_t sequential_threshold = 0;
};

/// Best solution known to this worker plus the best value heard from the
/// center. Only the value ever leaves the worker until the final fetch.
template <class Solution>
class SolutionStore {
 public:
  /// Keeps `solution` if it beats the local best. Safe from any thread.
  bool handle_solution(Solution solution, Value value) {
    std::lock_guard lock(mutex_);
    if (value >= local_best_.load()) return false;
    best_ = std::move(solution);
    best_value_ = value;
    local_best_.store(value);
    return true;
  }

  /// A BESTVAL_UPDATE from the center.
  void observe_global(Value value) {
    std::lock_guard lock(mutex_);
    if (value < local_best_.load()) {
      local_best_.store(value);
      global_best_ = value;
    }
  }

  /// Value to report if the local best improved on the global one. Marks it
  /// reported, so each improvement is sent once.
  std::optional<Value> take_report() {
    std::lock_guard lock(mutex_);
    const Value local = local_best_.load();
    if (local >= global_best_) return std::nullopt;
    global_best_ = local;
    return local;
  }

  [[nodiscard]] Value bound() const { return local_best_.load(); }
  [[nodiscard]] Value local_best() const { return local_best_.load(); }
  [[nodiscard]] Value global_best() const {
    std::lock_guard lock(mutex_);
    return global_best_;
  }
  /// Value of the solution held here; unbounded if none.
  [[nodiscard]] Value held_value() const {
    std::lock_guard lock(mutex_);
    return best_value_;
  }
  [[nodiscard]] std::optional<Solution> best_solution() const {
    std::lock_guard lock(mutex_);
    return best_;
  }

 private:
  mutable std::mutex mutex_;
  std::atomic<Value> local_best_{kUnboundedValue};
  Value global_best_ = kUnboundedValue;
  Value best_value_ = kUnboundedValue;
  std::optional<Solution> best_;
};

struct ExplorerCounters {
  std::uint64_t nodes = 0;           // branch() calls
  std::uint64_t registered = 0;      // child instances registered
  std::uint64_t stolen = 0;          // registered children taken before search
  std::uint64_t tasks_started = 0;   // root tasks explored here
  std::uint64_t solutions = 0;
};

/// One exploration thread's state: its task tree and the recursion of the
/// task it is working on, kept as an explicit stack so it can be advanced one
/// branch call at a time (simulation) or run freely (threads).
template <BranchingProblem P>
class Explorer {
 public:
  using Instance = InstanceOf<P>;
  using Solution = SolutionOf<P>;

  Explorer(const P& problem, SolutionStore<Solution>& store)
      : problem_(&problem),
        store_(&store),
        tree_([p = &problem](const Instance& i) { return p->priority(i); }) {}

  Explorer(const Explorer&) = delete;
  Explorer& operator=(const Explorer&) = delete;

  /// Hands a task to this explorer if it is idle.
  bool offer_task(Instance instance) {
    {
      std::lock_guard lock(mutex_);
      if (busy_) return false;
      inbox_ = std::move(instance);
      busy_ = true;
    }
    wake_.notify_one();
    return true;
  }

  [[nodiscard]] bool busy() const {
    std::lock_guard lock(mutex_);
    return busy_;
  }

  TaskTree<Instance>& tree() { return tree_; }

  /// Runs until exactly one branch() call happened or the task is finished.
  /// Returns false when there was nothing to do. Owning thread only.
  bool step() {
    if (stack_.empty()) {
      std::optional<Instance> next;
      {
        std::lock_guard lock(mutex_);
        next = std::move(inbox_);
        inbox_.reset();
      }
      if (!next) return false;
      const NodeHandle root = tree_.create_root();
      counters_.tasks_started.fetch_add(1);
      search(root, *next);
      if (stack_.empty()) finish_task();
      return true;
    }
    while (!stack_.empty()) {
      Frame& top = stack_.back();
      if (top.next < top.children.size()) {
        const NodeHandle child = top.children[top.next++];
        auto start = tree_.begin_search(child);
        if (start.stolen()) {
          counters_.stolen.fetch_add(1);
          continue;
        }
        search(child, *start.instance);
        break;
      }
      tree_.complete(top.node);
      stack_.pop_back();
    }
    if (stack_.empty()) finish_task();
    return true;
  }

  /// Steps until the current task is done.
  void run_to_completion() {
    while (step()) {
      if (!busy()) break;
    }
  }

  /// Thread body: waits for tasks until stopped.
  void run(std::stop_token stop) {
    while (!stop.stop_requested()) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, stop, [&] { return inbox_.has_value(); });
        if (stop.stop_requested()) return;
      }
      while (step()) {
        if (stop.stop_requested()) return;
        if (stack_.empty()) break;
      }
    }
  }

  [[nodiscard]] ExplorerCounters counters() const {
    return {counters_.nodes.load(), counters_.registered.load(), counters_.stolen.load(),
            counters_.tasks_started.load(), counters_.solutions.load()};
  }

  /// Registrations the communication loop has not yet answered with a push.
  std::uint64_t take_push_credits() { return push_credits_.exchange(0); }

 private:
  struct Frame {
    NodeHandle node;
    std::vector<NodeHandle> children;
    std::size_t next = 0;
  };

  void search(NodeHandle node, const Instance& instance) {
    counters_.nodes.fetch_add(1);
    auto outcome = problem_->branch(instance, store_->bound());
    using Kind = typename OutcomeOf<P>::Kind;
    if (outcome.kind == Kind::Solution) {
      counters_.solutions.fetch_add(1);
      const Value v = problem_->solution_value(*outcome.solution);
      store_->handle_solution(std::move(*outcome.solution), v);
      if (!problem_->explore_after_solution()) outcome.children.clear();
    }
    if (outcome.kind == Kind::Pruned || outcome.children.empty()) {
      tree_.complete(node);
      return;
    }
    const std::size_t k = outcome.children.size();
    auto handles = tree_.register_child_instances(node, std::move(outcome.children));
    counters_.registered.fetch_add(k);
    push_credits_.fetch_add(k);
    stack_.push_back(Frame{node, std::move(handles), 0});
  }

  void finish_task() {
    std::lock_guard lock(mutex_);
    if (!inbox_) busy_ = false;
  }

  struct AtomicCounters {
    std::atomic<std::uint64_t> nodes{0};
    std::atomic<std::uint64_t> registered{0};
    std::atomic<std::uint64_t> stolen{0};
    std::atomic<std::uint64_t> tasks_started{0};
    std::atomic<std::uint64_t> solutions{0};
  };

  const P* problem_;
  SolutionStore<Solution>* store_;
  TaskTree<Instance> tree_;
  std::vector<Frame> stack_;

  mutable std::mutex mutex_;
  std::condition_variable_any wake_;
  std::optional<Instance> inbox_;
  bool busy_ = false;

  AtomicCounters counters_;
  std::atomic<std::uint64_t> push_credits_{0};
};

struct WorkerReport {
  Rank rank{};
  std::int64_t tasks_received = 0;  // from other workers (semi) or the center (central)
  std::int64_t tasks_sent = 0;      // to other workers (semi) or pushes (central)
  std::int64_t nb_sent_tasks = 0;   // unacknowledged at exit
  std::uint64_t solutions_found = 0;
  Value best_value = kUnboundedValue;
  double wall_seconds = 0.0;
  ExplorerCounters explored;
  std::uint64_t bestval_sent = 0;
  std::uint64_t available_sent = 0;
  std::uint64_t refusals = 0;
  std::size_t max_waiting = 0;
};

/// Event a worker core records for cross-checks in tests.
struct WorkerEvent {
  enum class Kind : std::uint8_t { SentWork, ReceivedWork, Pushed };
  Kind kind;
  Rank peer;
  Bytes task;
};

/// A worker's communication side (updateWorkerIPC / updatePendingTasks) plus
/// its explorers. Transport calls are made only from comm_iteration.
template <BranchingProblem P>
class WorkerCore {
 public:
  using Instance = InstanceOf<P>;
  using Solution = SolutionOf<P>;

  WorkerCore(const P& problem, Rank self, WorkerConfig config = {})
      : problem_(&problem), self_(self), config_(config) {
    if (config.threads < 1) throw ContractViolation("a worker needs at least one exploration thread");
    if (self.value < 1) throw ContractViolation("worker rank must be at least 1");
    for (int i = 0; i < config.threads; ++i) explorers_.push_back(std::make_unique<Explorer<P>>(problem, store_));
  }

  /// One pass of the communication loop. Returns true if a message arrived.
  bool comm_iteration(Endpoint& endpoint) {
    const bool received = update_worker_ipc(endpoint);
    if (phase_ == WorkerPhase::Terminating && shutdown_) return received;
    update_pending_tasks(endpoint);
    report_best(endpoint);
    check_available(endpoint);
    return received;
  }

  bool update_worker_ipc(Endpoint& endpoint) {
    bool any = false;
    while (auto message = endpoint.try_receive()) {
      any = true;
      handle(endpoint, *message);
    }
    return any;
  }

  void update_pending_tasks(Endpoint& endpoint) {
    if (config_.mode == SchedulerMode::SemiCentralized) {
      while (!waiting_.empty()) {
        auto task = take_task();
        if (!task) break;
        const Rank dest = waiting_.front();
        waiting_.pop_front();
        Bytes bytes = problem_->serialize(*task);
        if (record_events_) events_.push_back({WorkerEvent::Kind::SentWork, dest, bytes});
        endpoint.send_async(dest, Tag::Work, std::move(bytes));
        ++nb_sent_;
        ++sent_total_;
      }
    } else {
      std::uint64_t credits = 0;
      for (auto& e : explorers_) credits += e->take_push_credits();
      push_credits_ += credits;
      if (push_credits_ > 0 && nb_sent_ == 0 && worker_push_policy(flag_) == PushDecision::PushToCenter) {
        if (auto task = take_task()) {
          const Value priority = problem_->priority(*task);
          Bytes bytes = problem_->serialize(*task);
          if (record_events_) events_.push_back({WorkerEvent::Kind::Pushed, kCenterRank, bytes});
          endpoint.send_async(kCenterRank, Tag::TaskPush, payload::task_push(priority, bytes));
          ++nb_sent_;
          ++sent_total_;
          --push_credits_;
        } else {
          push_credits_ = 0;
        }
      }
    }
    feed_idle_explorers();
  }

  /// Steps every explorer up to `steps` branch calls. Simulation only.
  bool step_explorers(int steps) {
    bool any = false;
    for (auto& e : explorers_) {
      for (int i = 0; i < steps; ++i) {
        if (!e->step()) break;
        any = true;
      }
    }
    return any;
  }

  /// Starts one thread per explorer.
  void start_threads() {
    for (auto& e : explorers_) {
      Explorer<P>* raw = e.get();
      threads_.emplace_back([raw](std::stop_token stop) { raw->run(stop); });
    }
  }

  void stop_threads() {
    for (auto& t : threads_) t.request_stop();
    threads_.clear();
  }

  [[nodiscard]] bool any_busy() const {
    for (const auto& e : explorers_) {
      if (e->busy()) return true;
    }
    return false;
  }

  [[nodiscard]] bool shut_down() const { return shutdown_; }
  [[nodiscard]] WorkerPhase phase() const { return phase_; }
  [[nodiscard]] Rank rank() const { return self_; }
  [[nodiscard]] std::int64_t nb_sent_tasks() const { return nb_sent_; }
  [[nodiscard]] const std::deque<Rank>& waiting_processes() const { return waiting_; }
  [[nodiscard]] SolutionStore<Solution>& store() { return store_; }
  [[nodiscard]] const SolutionStore<Solution>& store() const { return store_; }
  [[nodiscard]] Explorer<P>& explorer(std::size_t i) { return *explorers_.at(i); }
  [[nodiscard]] std::size_t explorer_count() const { return explorers_.size(); }
  [[nodiscard]] QueueFlag queue_flag() const { return flag_; }

  void record_events(bool on) { record_events_ = on; }
  [[nodiscard]] const std::vector<WorkerEvent>& events() const { return events_; }

  [[nodiscard]] WorkerReport report() const {
    WorkerReport r;
    r.rank = self_;
    r.tasks_received = received_total_;
    r.tasks_sent = sent_total_;
    r.nb_sent_tasks = nb_sent_;
    r.best_value = store_.held_value();
    r.bestval_sent = bestval_sent_;
    r.available_sent = available_sent_;
    r.refusals = refusals_;
    r.max_waiting = max_waiting_;
    for (const auto& e : explorers_) {
      const auto c = e->counters();
      r.explored.nodes += c.nodes;
      r.explored.registered += c.registered;
      r.explored.stolen += c.stolen;
      r.explored.tasks_started += c.tasks_started;
      r.explored.solutions += c.solutions;
    }
    r.solutions_found = r.explored.solutions;
    return r;
  }

 private:
  std::optional<Instance> take_task() {
    Explorer<P>* best = nullptr;
    std::int64_t best_priority = 0;
    for (auto& e : explorers_) {
      const auto p = e->tree().highest_pending_size();
      if (!p) continue;
      if (config_.sequential_threshold > 0 && *p <= config_.sequential_threshold) continue;
      if (best == nullptr || *p > best_priority) {
        best = e.get();
        best_priority = *p;
      }
    }
    if (best == nullptr) return std::nullopt;
    return best->tree().take_highest_priority();
  }

  void feed_idle_explorers() {
    if (explorers_.size() < 2) return;
    for (auto& e : explorers_) {
      if (e->busy()) continue;
      auto task = take_task();
      if (!task) return;
      if (!e->offer_task(std::move(*task))) throw ContractViolation("idle explorer refused a task");
    }
  }

  void start_task(Instance instance) {
    for (auto& e : explorers_) {
      if (e->offer_task(std::move(instance))) return;
    }
    throw ContractViolation("worker " + std::to_string(self_.value) + ": no idle explorer for WORK");
  }

  void handle(Endpoint& endpoint, const Message& m) {
    switch (m.tag) {
      case Tag::BestvalUpdate:
        store_.observe_global(payload::as_value(m));
        break;
      case Tag::SendWork:
        waiting_.push_back(payload::as_rank(m));
        max_waiting_ = std::max(max_waiting_, waiting_.size());
        break;
      case Tag::Work: {
        if (phase_ == WorkerPhase::Running) {
          throw ProtocolError("worker " + std::to_string(self_.value) + ": WORK from rank " +
                              std::to_string(m.source.value) + " while running");
        }
        Instance instance = m.payload.empty() ? seed_instance(m) : problem_->deserialize(m.payload);
        if (record_events_ && !m.payload.empty()) events_.push_back({WorkerEvent::Kind::ReceivedWork, m.source, m.payload});
        if (config_.mode == SchedulerMode::SemiCentralized) {
          endpoint.send_async(kCenterRank, Tag::StartedRunning, {});
          if (!m.source.is_center()) ++received_total_;
        } else if (!m.payload.empty()) {
          ++received_total_;
        }
        start_task(std::move(instance));
        endpoint.send_async(m.source, Tag::TaskAck, {});
        phase_ = WorkerPhase::Running;
        break;
      }
      case Tag::TaskAck:
        if (--nb_sent_ < 0) throw ProtocolError("worker " + std::to_string(self_.value) + ": unexpected TASK_ACK");
        break;
      case Tag::Terminate:
        if ((config_.refuse_with_unacked && nb_sent_ > 0) ||
            (config_.refuse_while_running && phase_ == WorkerPhase::Running)) {
          endpoint.send_async(kCenterRank, Tag::TerminateRefuse, {});
          ++refusals_;
        } else {
          endpoint.send_async(kCenterRank, Tag::TerminateAccept, payload::counters(sent_total_, received_total_));
          if (phase_ == WorkerPhase::Idle) phase_ = WorkerPhase::Terminating;
        }
        break;
      case Tag::SolutionRequest: {
        const auto best = store_.best_solution();
        const Value v = store_.held_value();
        endpoint.send_async(kCenterRank, Tag::Solution,
                            payload::solution(v, best ? problem_->serialize_solution(*best) : Bytes{}));
        break;
      }
      case Tag::Shutdown:
        phase_ = WorkerPhase::Terminating;
        shutdown_ = true;
        break;
      case Tag::QueueFull:
        flag_ = QueueFlag::Full;
        break;
      case Tag::QueueOpen:
        flag_ = QueueFlag::Open;
        break;
      default:
        throw ProtocolError("worker " + std::to_string(self_.value) + ": unexpected " +
                            std::string(tag_name(m.tag)));
    }
  }

  Instance seed_instance(const Message& m) {
    if (!m.source.is_center() || seeded_) {
      throw ProtocolError("worker " + std::to_string(self_.value) + ": empty WORK that is not the seed");
    }
    seeded_ = true;
    return problem_->root();
  }

  void report_best(Endpoint& endpoint) {
    if (auto v = store_.take_report()) {
      endpoint.send_async(kCenterRank, Tag::BestvalUpdate, payload::value(*v));
      ++bestval_sent_;
    }
    if (config_.emit_metadata) {
      std::optional<std::int64_t> meta;
      for (auto& e : explorers_) {
        const auto p = e->tree().highest_pending_size();
        if (p && (!meta || *p > *meta)) meta = p;
      }
      if (meta && meta != last_metadata_) {
        endpoint.send_async(kCenterRank, Tag::Metadata, payload::value(*meta));
        last_metadata_ = meta;
      }
    }
  }

  void check_available(Endpoint& endpoint) {
    if (phase_ != WorkerPhase::Running || any_busy()) return;
    for (auto& e : explorers_) {
      if (!e->tree().empty()) return;
    }
    if (config_.mode == SchedulerMode::Centralized && nb_sent_ > 0) return;
    endpoint.send_async(kCenterRank, Tag::Available, {});
    ++available_sent_;
    phase_ = WorkerPhase::Idle;
  }

  const P* problem_;
  Rank self_;
  WorkerConfig config_;
  SolutionStore<Solution> store_;
  std::vector<std::unique_ptr<Explorer<P>>> explorers_;
  std::vector<std::jthread> threads_;

  WorkerPhase phase_ = WorkerPhase::Idle;
  bool shutdown_ = false;
  bool seeded_ = false;
  std::deque<Rank> waiting_;
  std::int64_t nb_sent_ = 0;
  std::int64_t sent_total_ = 0;
  std::int64_t received_total_ = 0;
  std::uint64_t push_credits_ = 0;
  QueueFlag flag_ = QueueFlag::Open;
  std::optional<std::int64_t> last_metadata_;

  std::uint64_t bestval_sent_ = 0;
  std::uint64_t available_sent_ = 0;
  std::uint64_t refusals_ = 0;
  std::size_t max_waiting_ = 0;

  bool record_events_ = false;
  std::vector<WorkerEvent> events_;
};

/// Runs one worker process on real threads until the center shuts it down.
template <BranchingProblem P>
WorkerReport run_worker(Endpoint& endpoint, const P& problem, WorkerConfig config = {}) {
  const auto start = std::chrono::steady_clock::now();
  WorkerCore<P> core(problem, endpoint.rank(), config);
  core.start_threads();
  try {
    while (!core.shut_down()) {
      if (!core.comm_iteration(endpoint)) std::this_thread::sleep_for(config.idle_sleep);
    }
  } catch (...) {
    core.stop_threads();
    throw;
  }
  core.stop_threads();
  WorkerReport r = core.report();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace semilb
