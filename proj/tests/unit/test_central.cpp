#include <doctest.h>

#include <algorithm>

#include "semilb/central.hpp"
#include "semilb/sim_cluster.hpp"
#include "semilb/vcover/generate.hpp"
#include "semilb/vcover/problem.hpp"
#include "support/synthetic_tree.hpp"

using namespace semilb;

namespace {

CentralConfig config(int workers, std::int64_t c, bool fifo = false) {
  CentralConfig cfg;
  cfg.workers = workers;
  cfg.tasks_per_worker = c;
  cfg.fifo = fifo;
  return cfg;
}

Bytes tagged(std::uint8_t b) { return Bytes{b}; }

}  // namespace

TEST_CASE("dispatch hands the highest priority task to the lowest idle rank") {
  CentralQueueState s(config(3, 10));
  s.push(10, tagged('A'));
  s.push(20, tagged('B'));
  s.status[1] = WorkerStatus::Running;
  const auto out = center_dispatch(s);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == Outgoing{Rank{2}, Tag::Work, tagged('B'), false});
  CHECK(out[1] == Outgoing{Rank{3}, Tag::Work, tagged('A'), false});
  CHECK(s.status[2] == WorkerStatus::Running);
  CHECK(s.in_flight == 2);
  CHECK(s.empty());
}

TEST_CASE("equal priorities leave oldest first") {
  CentralQueueState s(config(1, 10));
  s.push(5, tagged('x'));
  s.push(5, tagged('y'));
  s.push(5, tagged('z'));
  CHECK(s.pop()->task == tagged('x'));
  CHECK(s.pop()->task == tagged('y'));
  CHECK(s.pop()->task == tagged('z'));
  CHECK_FALSE(s.pop().has_value());
}

TEST_CASE("fifo mode ignores priority") {
  CentralQueueState s(config(1, 10, true));
  s.push(10, tagged('A'));
  s.push(20, tagged('B'));
  CHECK(s.pop()->task == tagged('A'));
  CHECK(s.pop()->task == tagged('B'));
}

TEST_CASE("dispatch with nobody idle keeps the queue") {
  CentralQueueState s(config(2, 10));
  s.status[1] = s.status[2] = WorkerStatus::Running;
  s.push(1, tagged('a'));
  CHECK(center_dispatch(s).empty());
  CHECK(s.size() == 1);
}

TEST_CASE("one FULL and one OPEN per threshold crossing") {
  CentralQueueState s(config(2, 2));  // limit 4
  CHECK(s.task_limit() == 4);
  for (int i = 0; i < 4; ++i) CHECK_FALSE(s.push(i, tagged(1)).has_value());
  CHECK(s.push(9, tagged(1)) == std::optional(QueueFlag::Full));
  CHECK_FALSE(s.push(9, tagged(1)).has_value());
  CHECK_FALSE(s.push(9, tagged(1)).has_value());
  CHECK(s.size() == 7);
  // Open again at or below 0.9 * 4 = 3.6 tasks.
  for (int i = 0; i < 3; ++i) {
    s.pop();
    CHECK_FALSE(s.update_flag().has_value());
  }
  s.pop();
  CHECK(s.update_flag() == std::optional(QueueFlag::Open));
  CHECK_FALSE(s.update_flag().has_value());
  CHECK(s.flag_history == std::vector<Tag>{Tag::QueueFull, Tag::QueueOpen});
}

TEST_CASE("the memory limit also closes the queue") {
  CentralConfig cfg = config(1, 1000);
  cfg.memory_limit = 10;
  CentralQueueState s(cfg);
  CHECK_FALSE(s.push(1, Bytes(6)).has_value());
  CHECK(s.push(1, Bytes(6)) == std::optional(QueueFlag::Full));
  CHECK(s.bytes() == 12);
  s.pop();
  CHECK(s.update_flag() == std::optional(QueueFlag::Open));
}

TEST_CASE("dispatch broadcasts the reopening it causes") {
  CentralQueueState s(config(3, 1));  // limit 3
  for (int i = 0; i < 4; ++i) s.push(i, tagged(1));
  REQUIRE(s.flag() == QueueFlag::Full);
  const auto out = center_dispatch(s);
  REQUIRE(out.size() == 4);
  CHECK(out.back() == Outgoing{Rank{}, Tag::QueueOpen, {}, true});
}

TEST_CASE("workers keep tasks while the queue is full") {
  CHECK(worker_push_policy(QueueFlag::Open) == PushDecision::PushToCenter);
  CHECK(worker_push_policy(QueueFlag::Full) == PushDecision::KeepLocal);
}

TEST_CASE("baseline termination condition") {
  CentralQueueState s(config(2, 10));
  CHECK(central_termination(s) == TerminationDecision::Terminate);
  s.in_flight = 1;
  CHECK(central_termination(s) == TerminationDecision::Resume);
  s.in_flight = 0;
  s.status[2] = WorkerStatus::Running;
  CHECK(central_termination(s) == TerminationDecision::Resume);
  s.status[2] = WorkerStatus::Available;
  s.push(1, tagged(1));
  CHECK(central_termination(s) == TerminationDecision::Resume);
}

TEST_CASE("invalid baseline configurations are rejected") {
  CHECK_THROWS_AS(CentralQueueState{config(0, 10)}, ContractViolation);
  CentralConfig cfg = config(1, 10);
  cfg.hysteresis = 1.5;
  CHECK_THROWS_AS(CentralQueueState{cfg}, ContractViolation);
}

TEST_CASE("the flag change reaches the pusher before its ack") {
  SimNetwork net(2, SimNetworkConfig{1, 1, 1});
  CentralCenter center(config(2, 1));  // limit 2
  center.start(net.endpoint(kCenterRank), 0);
  for (int i = 0; i < 3; ++i) {
    net.endpoint(Rank{1}).send_async(kCenterRank, Tag::TaskPush, payload::task_push(5, tagged(1)));
  }
  net.advance(1);
  // Keep both workers busy so nothing is dispatched.
  net.endpoint(Rank{2}).send_async(kCenterRank, Tag::TaskAck, {});
  center.poll(net.endpoint(kCenterRank), 0);
  net.advance(1);
  std::vector<Tag> seen;
  while (auto m = net.endpoint(Rank{1}).try_receive()) seen.push_back(m->tag);
  const auto full = std::find(seen.begin(), seen.end(), Tag::QueueFull);
  REQUIRE(full != seen.end());
  CHECK(std::count(seen.begin(), full, Tag::TaskAck) == 2);
  CHECK(std::count(full, seen.end(), Tag::TaskAck) == 1);
}

TEST_CASE("baseline center rejects unknown ranks") {
  SimNetwork net(2, SimNetworkConfig{1, 1, 1});
  CentralCenter center(config(1, 10));
  CHECK_THROWS_AS(center.start(net.endpoint(kCenterRank), 0), ContractViolation);
}

TEST_CASE("pushes in flight overshoot the limit by at most one per worker") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const testing::SyntheticTree tree(seed, 11);
    SimClusterConfig cfg;
    cfg.mode = SchedulerMode::Centralized;
    cfg.workers = 3 + static_cast<int>(seed % 6);
    cfg.seed = seed;
    cfg.network = SimNetworkConfig{1, 25, seed};  // slow flag broadcasts widen the race
    cfg.central.tasks_per_worker = 2;
    SimCluster<testing::SyntheticTree> cluster(tree, cfg);
    const auto r = cluster.run();
    INFO("seed " << seed);
    REQUIRE_FALSE(r.deadlocked);
    const auto limit = static_cast<std::size_t>(2 * cfg.workers);
    CHECK(r.center.max_queue_size <= limit + static_cast<std::size_t>(cfg.workers));
    CHECK(r.center.best_value == tree.min_leaf());
    CHECK(r.total_nodes() == r.total_registered() + 1);
    // Crossings alternate, starting with FULL.
    const auto& flags = r.center.flag_broadcasts;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      CHECK(flags[i] == (i % 2 == 0 ? Tag::QueueFull : Tag::QueueOpen));
    }
  }
}

TEST_CASE("baseline explores every node exactly once") {
  auto rec = std::make_shared<testing::VisitRecorder>();
  const testing::SyntheticTree tree(4, 9, 3, rec);
  SimClusterConfig cfg;
  cfg.mode = SchedulerMode::Centralized;
  cfg.workers = 5;
  cfg.central.tasks_per_worker = 3;
  SimCluster<testing::SyntheticTree> cluster(tree, cfg);
  const auto r = cluster.run();
  REQUIRE_FALSE(r.deadlocked);
  const auto counts = rec->counts();
  CHECK(counts.size() == tree.all_nodes().size());
  CHECK(std::all_of(counts.begin(), counts.end(), [](const auto& kv) { return kv.second == 1; }));
  CHECK(r.center.tasks_sent == r.center.tasks_received);
  CHECK(r.center.tasks_sent > 0);
  for (const auto& w : r.workers) CHECK(w.nb_sent_tasks == 0);
}

TEST_CASE("baseline agrees with the sequential cover") {
  const vc::Graph g = vc::gen_gnp(32, 0.3, 9);
  const auto expected = vc::mvc_sequential(g).size;
  for (bool fifo : {false, true}) {
    SimClusterConfig cfg;
    cfg.mode = SchedulerMode::Centralized;
    cfg.workers = 4;
    cfg.central.fifo = fifo;
    const vc::VertexCoverProblem problem(g);
    SimCluster<vc::VertexCoverProblem> cluster(problem, cfg);
    const auto r = cluster.run();
    REQUIRE_FALSE(r.deadlocked);
    CHECK(r.center.best_value == static_cast<Value>(expected));
    REQUIRE(r.center.solution.has_value());
    CHECK(g.is_cover(problem.deserialize_solution(*r.center.solution)));
  }
}
