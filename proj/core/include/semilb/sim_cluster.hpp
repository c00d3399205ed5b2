#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "semilb/center.hpp"
#include "semilb/central.hpp"
#include "semilb/transport/sim_transport.hpp"
#include "semilb/worker.hpp"

namespace semilb {

struct SimClusterConfig {
  int workers = 1;
  SchedulerMode mode = SchedulerMode::SemiCentralized;
  SimNetworkConfig network;
  CenterConfig center;    // workers is overwritten
  CentralConfig central;  // workers is overwritten
  WorkerConfig worker;    // mode is overwritten
  /// Branch calls each explorer makes per tick, drawn uniformly.
  int min_steps = 1;
  int max_steps = 4;
  std::uint64_t seed = 1;
  std::int64_t max_ticks = 50'000'000;
  double tick_seconds = 0.001;
};

struct SimRunResult {
  FinalResult center;
  std::vector<WorkerReport> workers;  // index i-1 is rank i
  std::int64_t ticks = 0;
  bool deadlocked = false;
  /// Termination attempts that began while a WORK message was in flight.
  std::uint64_t race_windows = 0;
  /// WORK messages still in the network when the center decided.
  std::size_t work_in_flight_at_end = 0;

  [[nodiscard]] std::uint64_t total_nodes() const {
    std::uint64_t n = 0;
    for (const auto& w : workers) n += w.explored.nodes;
    return n;
  }
  [[nodiscard]] std::uint64_t total_registered() const {
    std::uint64_t n = 0;
    for (const auto& w : workers) n += w.explored.registered;
    return n;
  }
};

/// All ranks of one run in a single thread on the simulated network. Every
/// tick each worker runs one communication pass and a seeded number of branch
/// calls, then the center polls and the network clock advances. When nothing
/// can happen before the next delivery or timer, the clock jumps there.
template <BranchingProblem P>
class SimCluster {
 public:
  SimCluster(const P& problem, SimClusterConfig config)
      : config_(std::move(config)), network_(config_.workers, config_.network), rng_(config_.seed) {
    config_.worker.mode = config_.mode;
    for (int w = 1; w <= config_.workers; ++w) {
      cores_.push_back(std::make_unique<WorkerCore<P>>(problem, Rank{w}, config_.worker));
    }
    if (config_.mode == SchedulerMode::SemiCentralized) {
      config_.center.workers = config_.workers;
      coordinator_ = std::make_unique<Center>(config_.center);
    } else {
      config_.central.workers = config_.workers;
      coordinator_ = std::make_unique<CentralCenter>(config_.central);
    }
  }

  SimNetwork& network() { return network_; }
  WorkerCore<P>& worker(Rank r) { return *cores_.at(static_cast<std::size_t>(r.value - 1)); }
  Coordinator& coordinator() { return *coordinator_; }

  /// Called once per tick after the center polled; for scripted scenarios.
  void on_tick(std::function<void(SimCluster&)> hook) { hook_ = std::move(hook); }

  SimRunResult run() {
    SimRunResult out;
    SimEndpoint& center_ep = network_.endpoint(kCenterRank);
    std::uniform_int_distribution<int> steps(config_.min_steps, config_.max_steps);
    coordinator_->start(center_ep, 0.0);
    std::uint64_t attempts = 0;

    while (!coordinator_->done()) {
      bool busy = false;
      for (auto& core : cores_) {
        core->comm_iteration(network_.endpoint(core->rank()));
        core->step_explorers(steps(rng_));
        // A running worker with idle explorers still owes an AVAILABLE.
        busy = busy || core->any_busy() || core->phase() == WorkerPhase::Running;
      }
      coordinator_->poll(center_ep, seconds());
      if (hook_) hook_(*this);

      const std::uint64_t now_attempts = coordinator_->termination_attempts();
      if (now_attempts != attempts) {
        if (network_.in_flight(Tag::Work) > 0) ++out.race_windows;
        attempts = now_attempts;
      }
      if (coordinator_->done()) break;

      if (network_.now() >= config_.max_ticks) {
        out.deadlocked = true;
        break;
      }
      if (busy || pending_inbox()) {
        network_.advance(1);
        continue;
      }
      std::optional<std::int64_t> next = network_.next_delivery_tick();
      if (auto wake = coordinator_->wake_time()) {
        const auto wake_tick = static_cast<std::int64_t>(std::ceil(*wake / config_.tick_seconds));
        next = next ? std::min(*next, wake_tick) : wake_tick;
      }
      if (!next) {
        out.deadlocked = true;
        break;
      }
      network_.advance_to(std::max(*next, network_.now() + 1));
    }

    out.work_in_flight_at_end = network_.in_flight(Tag::Work);
    // Let the shutdown broadcast and any final traffic land.
    for (int guard = 0; guard < 1'000'000 && !network_.idle(); ++guard) {
      network_.advance(1);
      for (auto& core : cores_) core->update_worker_ipc(network_.endpoint(core->rank()));
      while (center_ep.try_receive()) {
      }
    }
    out.center = coordinator_->result();
    out.ticks = network_.now();
    for (auto& core : cores_) out.workers.push_back(core->report());
    return out;
  }

 private:
  [[nodiscard]] double seconds() const { return static_cast<double>(network_.now()) * config_.tick_seconds; }

  bool pending_inbox() {
    for (auto& core : cores_) {
      if (network_.endpoint(core->rank()).has_pending()) return true;
    }
    return network_.endpoint(kCenterRank).has_pending();
  }

  SimClusterConfig config_;
  SimNetwork network_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<WorkerCore<P>>> cores_;
  std::unique_ptr<Coordinator> coordinator_;
  std::function<void(SimCluster&)> hook_;
};

}  // namespace semilb
