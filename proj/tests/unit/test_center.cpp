#include <doctest.h>

#include <algorithm>
#include <set>

#include "semilb/center.hpp"
#include "semilb/sim_cluster.hpp"
#include "semilb/transport/sim_transport.hpp"
#include "support/synthetic_tree.hpp"
#include "support/waiting_oracle.hpp"

using namespace semilb;

namespace {

Message msg(Tag tag, int source, Bytes payload = {}) { return Message{tag, Rank{source}, std::move(payload)}; }

CenterState state_with(int p, std::initializer_list<std::pair<int, WorkerStatus>> statuses) {
  CenterState s(p, 1);
  for (auto [r, st] : statuses) s.set_status(Rank{r}, st);
  return s;
}

std::vector<int> ranks(const std::vector<Rank>& v) {
  std::vector<int> out;
  for (Rank r : v) out.push_back(r.value);
  return out;
}

}  // namespace

TEST_CASE("available is paired with the running worker") {
  auto s = state_with(4, {{2, WorkerStatus::Running}});
  const auto out = handle_center_message(s, msg(Tag::Available, 3));
  REQUIRE(out.size() == 1);
  CHECK(out[0] == Outgoing{Rank{2}, Tag::SendWork, payload::rank(Rank{3}), false});
  CHECK(s.status_of(Rank{3}) == WorkerStatus::Assigned);
  CHECK(s.fed_by[3] == std::optional<Rank>(Rank{2}));
}

TEST_CASE("available with nobody running waits") {
  auto s = state_with(4, {});
  CHECK(handle_center_message(s, msg(Tag::Available, 3)).empty());
  CHECK(s.status_of(Rank{3}) == WorkerStatus::Available);
}

TEST_CASE("stale best values are ignored, better ones broadcast") {
  auto s = state_with(4, {});
  CHECK(handle_center_message(s, msg(Tag::BestvalUpdate, 2, payload::value(90))).size() == 1);
  CHECK(handle_center_message(s, msg(Tag::BestvalUpdate, 4, payload::value(100))).empty());
  CHECK(s.best.value == 90);
  CHECK(s.best.holder == std::optional<Rank>(Rank{2}));
  const auto out = handle_center_message(s, msg(Tag::BestvalUpdate, 4, payload::value(80)));
  REQUIRE(out.size() == 1);
  CHECK(out[0].broadcast);
  CHECK(payload::as_value(Message{Tag::BestvalUpdate, {}, out[0].payload}) == 80);
  CHECK(s.best.holder == std::optional<Rank>(Rank{4}));
  CHECK(s.best.trace == std::vector<Value>{90, 80});
}

TEST_CASE("started_running clears the inbound edge and feeds one idle worker") {
  auto s = state_with(4, {{1, WorkerStatus::Running}, {2, WorkerStatus::Available}, {3, WorkerStatus::Available}});
  s.set_status(Rank{4}, WorkerStatus::Assigned);
  s.assign(Rank{1}, Rank{4});
  const auto out = handle_center_message(s, msg(Tag::StartedRunning, 4));
  CHECK(s.status_of(Rank{4}) == WorkerStatus::Running);
  CHECK_FALSE(s.fed_by[4].has_value());
  CHECK(s.feeds[1].empty());
  REQUIRE(out.size() == 1);
  CHECK(out[0] == Outgoing{Rank{4}, Tag::SendWork, payload::rank(Rank{2}), false});
  CHECK(s.status_of(Rank{2}) == WorkerStatus::Assigned);
  CHECK(s.status_of(Rank{3}) == WorkerStatus::Available);
}

TEST_CASE("metadata is recorded") {
  auto s = state_with(3, {});
  CHECK(handle_center_message(s, msg(Tag::Metadata, 3, payload::value(77))).empty());
  CHECK(s.metadata[3] == std::optional<std::int64_t>(77));
}

TEST_CASE("messages from unknown ranks are protocol errors") {
  auto s = state_with(3, {});
  CHECK_THROWS_AS(handle_center_message(s, msg(Tag::Available, 4)), ProtocolError);
  CHECK_THROWS_AS(handle_center_message(s, msg(Tag::Available, 0)), ProtocolError);
}

TEST_CASE("next working node: only candidate") {
  auto s = state_with(3, {{2, WorkerStatus::Running}});
  CHECK(get_next_working_node(s, Rank{3}) == std::optional<Rank>(Rank{2}));
}

TEST_CASE("next working node: metadata policy picks the largest value") {
  CenterState s(6, 1, AssignmentPolicy::Metadata);
  s.set_status(Rank{2}, WorkerStatus::Running);
  s.set_status(Rank{5}, WorkerStatus::Running);
  s.metadata[2] = 50;
  s.metadata[5] = 120;
  CHECK(get_next_working_node(s, Rank{3}) == std::optional<Rank>(Rank{5}));
}

TEST_CASE("next working node: chains back to a candidate exclude it") {
  // r=1 feeds a=2, a feeds w=3; all three running otherwise
  auto s = state_with(4, {{2, WorkerStatus::Running}, {3, WorkerStatus::Running}, {4, WorkerStatus::Available}});
  s.assign(Rank{1}, Rank{2});
  s.assign(Rank{2}, Rank{3});
  for (int i = 0; i < 50; ++i) CHECK(get_next_working_node(s, Rank{1}) == std::nullopt);
  s.set_status(Rank{4}, WorkerStatus::Running);
  for (int i = 0; i < 50; ++i) CHECK(get_next_working_node(s, Rank{1}) == std::optional<Rank>(Rank{4}));
}

TEST_CASE("next working node: random policy covers every eligible worker") {
  auto s = state_with(5, {{1, WorkerStatus::Running}, {2, WorkerStatus::Running}, {4, WorkerStatus::Running}});
  std::set<int> seen;
  for (int i = 0; i < 200; ++i) seen.insert(get_next_working_node(s, Rank{3})->value);
  CHECK(seen == std::set<int>{1, 2, 4});
}

TEST_CASE("waiting lists for max_b=3, p=13") {
  const auto lists = build_waiting_lists(3, 13);
  CHECK(ranks(lists[1]) == std::vector<int>{2, 3, 4, 7, 10});
  CHECK(ranks(lists[2]) == std::vector<int>{5, 8, 11});
  CHECK(ranks(lists[3]) == std::vector<int>{6, 9, 12});
  CHECK(ranks(lists[4]) == std::vector<int>{13});
  for (int i = 5; i <= 13; ++i) CHECK(lists[static_cast<std::size_t>(i)].empty());
}

TEST_CASE("waiting lists for a single worker are empty") {
  const auto lists = build_waiting_lists(2, 1);
  REQUIRE(lists.size() == 2);
  CHECK(lists[1].empty());
}

TEST_CASE("waiting lists match the digit construction and partition 2..p") {
  for (int b = 2; b <= 6; ++b) {
    for (int p = 1; p <= 500; ++p) {
      const auto lists = build_waiting_lists(b, p);
      const auto oracle = testing::digit_waiting_lists(b, p);
      std::vector<int> seen(static_cast<std::size_t>(p) + 1, 0);
      bool same = true;
      for (int i = 1; i <= p; ++i) {
        if (ranks(lists[static_cast<std::size_t>(i)]) != oracle[static_cast<std::size_t>(i)]) same = false;
        for (Rank q : lists[static_cast<std::size_t>(i)]) ++seen[static_cast<std::size_t>(q.value)];
      }
      bool partition = seen[1] == 0;
      for (int q = 2; q <= p; ++q) partition = partition && seen[static_cast<std::size_t>(q)] == 1;
      INFO("b=" << b << " p=" << p);
      CHECK(same);
      CHECK(partition);
    }
  }
}

TEST_CASE("waiting list depth is the ceiling of log_b p") {
  CHECK(waiting_list_depth(3, 13) == 3);
  CHECK(waiting_list_depth(2, 1) == 0);
  CHECK(waiting_list_depth(2, 8) == 3);
  CHECK(waiting_list_depth(2, 9) == 4);
}

namespace {

struct Harness {
  SimNetwork net;
  Center center;
  double now = 0;

  Harness(int p, TerminationConfig t) : net(p, SimNetworkConfig{1, 1, 1}), center(config(p, t)) {
    center.start(net.endpoint(kCenterRank), now);
    settle();
  }

  static CenterConfig config(int p, TerminationConfig t) {
    CenterConfig c;
    c.workers = p;
    c.use_waiting_lists = false;
    c.termination = t;
    return c;
  }

  void settle() {
    net.advance(1);
    center.poll(net.endpoint(kCenterRank), now);
  }

  std::vector<Message> drain(int w) {
    std::vector<Message> out;
    while (auto m = net.endpoint(Rank{w}).try_receive()) out.push_back(*m);
    return out;
  }

  void send(int w, Tag tag, Bytes payload = {}) { net.endpoint(Rank{w}).send_async(kCenterRank, tag, std::move(payload)); }
};

}  // namespace

TEST_CASE("termination: quiet for the timeout terminates") {
  Harness h(2, TerminationConfig{5.0, true, true});
  h.send(1, Tag::Available);
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Quiescing);
  CHECK(h.center.wake_time() == std::optional<double>(5.0));
  h.now = 4.9;
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Quiescing);
  h.now = 5.0;
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Voting);
  for (int round = 0; round < 2; ++round) {
    h.net.advance(1);
    for (int w = 1; w <= 2; ++w) {
      auto in = h.drain(w);
      CHECK(std::any_of(in.begin(), in.end(), [](const Message& m) { return m.tag == Tag::Terminate; }));
      h.send(w, Tag::TerminateAccept, payload::counters(0, 0));
    }
    h.settle();
  }
  CHECK(h.center.done());
  CHECK(h.center.last_decision() == std::optional(TerminationDecision::Terminate));
  CHECK(h.center.state().counters.vote_rounds == 2);
}

TEST_CASE("termination: started_running during the wait resumes") {
  Harness h(2, TerminationConfig{5.0, true, true});
  h.send(1, Tag::Available);
  h.settle();
  REQUIRE(h.center.phase() == Center::Phase::Quiescing);
  h.now = 1.0;
  h.send(2, Tag::StartedRunning);
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Running);
  CHECK(h.center.last_decision() == std::optional(TerminationDecision::Resume));
  CHECK(h.center.state().counters.termination_cancellations == 1);
}

TEST_CASE("termination: a refusal resumes") {
  Harness h(2, TerminationConfig{0.0, false, true});
  h.send(1, Tag::Available);
  h.settle();
  REQUIRE(h.center.phase() == Center::Phase::Voting);
  h.send(1, Tag::TerminateRefuse);
  h.send(2, Tag::TerminateAccept, payload::counters(0, 0));
  h.settle();
  CHECK(h.center.last_decision() == std::optional(TerminationDecision::Resume));
  CHECK(h.center.state().counters.termination_cancellations == 1);
  // Still idle, so a fresh attempt starts at once.
  CHECK(h.center.phase() == Center::Phase::Voting);
  CHECK(h.center.state().counters.termination_attempts == 2);
}

TEST_CASE("termination: unbalanced counters force another round") {
  Harness h(2, TerminationConfig{0.0, false, true});
  h.send(1, Tag::Available);
  h.settle();
  h.send(1, Tag::TerminateAccept, payload::counters(1, 0));
  h.send(2, Tag::TerminateAccept, payload::counters(0, 0));
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Voting);
  CHECK(h.center.state().counters.vote_rounds == 2);
  h.send(1, Tag::TerminateAccept, payload::counters(1, 0));
  h.send(2, Tag::TerminateAccept, payload::counters(0, 1));
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Voting);
  h.send(1, Tag::TerminateAccept, payload::counters(1, 0));
  h.send(2, Tag::TerminateAccept, payload::counters(0, 1));
  h.settle();
  CHECK(h.center.done());
}

TEST_CASE("termination: the winning solution is fetched before shutdown") {
  Harness h(2, TerminationConfig{0.0, false, false});
  h.send(2, Tag::BestvalUpdate, payload::value(7));
  h.send(1, Tag::Available);
  h.settle();
  h.send(1, Tag::TerminateAccept, payload::counters(0, 0));
  h.send(2, Tag::TerminateAccept, payload::counters(0, 0));
  h.settle();
  CHECK(h.center.phase() == Center::Phase::Fetching);
  h.net.advance(1);
  auto in = h.drain(2);
  CHECK(std::any_of(in.begin(), in.end(), [](const Message& m) { return m.tag == Tag::SolutionRequest; }));
  h.send(2, Tag::Solution, payload::solution(7, Bytes{1, 2, 3}));
  h.settle();
  CHECK(h.center.done());
  CHECK(h.center.result().solution == std::optional<Bytes>(Bytes{1, 2, 3}));
  CHECK(h.center.result().best_holder == std::optional<Rank>(Rank{2}));
}

TEST_CASE("startup installs waiting lists and seeds rank 1") {
  SimNetwork net(4, SimNetworkConfig{1, 1, 1});
  CenterConfig c;
  c.workers = 4;
  Center center(c);
  center.start(net.endpoint(kCenterRank), 0);
  CHECK(center.state().status_of(Rank{1}) == WorkerStatus::Running);
  for (int w = 2; w <= 4; ++w) CHECK(center.state().status_of(Rank{w}) == WorkerStatus::Assigned);
  net.advance(1);
  std::vector<int> targets;
  bool seeded = false;
  while (auto m = net.endpoint(Rank{2}).try_receive()) {
    if (m->tag == Tag::SendWork) CHECK(payload::as_rank(*m) == Rank{4});
  }
  while (auto m = net.endpoint(Rank{1}).try_receive()) {
    if (m->tag == Tag::SendWork) targets.push_back(payload::as_rank(*m).value);
    if (m->tag == Tag::Work) {
      CHECK(m->payload.empty());
      seeded = true;
    }
  }
  CHECK(targets == std::vector<int>{2, 3});
  CHECK(seeded);
  CHECK(center.state().assignments_acyclic());
}

TEST_CASE("single worker run ends with that worker's solution") {
  const testing::SyntheticTree tree(3, 6);
  SimClusterConfig cfg;
  cfg.workers = 1;
  cfg.center.termination.timeout_s = 0.05;
  SimCluster<testing::SyntheticTree> cluster(tree, cfg);
  const auto r = cluster.run();
  CHECK_FALSE(r.deadlocked);
  CHECK(r.center.best_value == tree.min_leaf());
  CHECK(r.center.best_holder == std::optional<Rank>(Rank{1}));
  REQUIRE(r.center.solution.has_value());
  CHECK(tree.deserialize_solution(*r.center.solution).value == tree.min_leaf());
}

TEST_CASE("replaying the center's inbox reproduces its assignments") {
  const testing::SyntheticTree tree(11, 9);
  SimClusterConfig cfg;
  cfg.workers = 4;
  cfg.seed = 4;
  cfg.network.seed = 4;
  cfg.network.record_trace = true;
  cfg.center.termination.timeout_s = 0.05;
  cfg.center.seed = 99;
  SimCluster<testing::SyntheticTree> cluster(tree, cfg);
  const auto r = cluster.run();
  REQUIRE_FALSE(r.deadlocked);

  // Independent status model of the pseudocode, fed with what the center received.
  CenterState replay(4, 99);
  replay.set_status(Rank{1}, WorkerStatus::Running);
  for (int w = 2; w <= 4; ++w) replay.set_status(Rank{w}, WorkerStatus::Assigned);
  const auto lists = build_waiting_lists(2, 4);
  for (int i = 1; i <= 4; ++i) {
    for (Rank q : lists[static_cast<std::size_t>(i)]) replay.assign(Rank{i}, q);
  }

  std::vector<std::pair<int, int>> replayed;  // (feeder, receiver)
  std::vector<std::pair<int, int>> observed;
  for (int i = 1; i <= 4; ++i) {
    for (Rank q : lists[static_cast<std::size_t>(i)]) replayed.emplace_back(i, q.value);
  }
  for (const auto& d : cluster.network().trace()) {
    const Message& m = d.message;
    if (m.source == kCenterRank && m.tag == Tag::SendWork) {
      observed.emplace_back(d.dest.value, payload::as_rank(m).value);
    }
    if (d.dest != kCenterRank) continue;
    if (m.tag != Tag::Available && m.tag != Tag::StartedRunning && m.tag != Tag::BestvalUpdate &&
        m.tag != Tag::Metadata) {
      continue;
    }
    const auto status_before = replay.status;
    for (const auto& out : handle_center_message(replay, m)) {
      if (out.tag != Tag::SendWork) continue;
      const int receiver = payload::as_rank(Message{Tag::SendWork, {}, out.payload}).value;
      replayed.emplace_back(out.dest.value, receiver);
      // The feeder was running when chosen.
      if (m.tag == Tag::Available) CHECK(status_before[static_cast<std::size_t>(out.dest.value)] == WorkerStatus::Running);
    }
    CHECK(replay.assignments_acyclic());
  }
  // The trace is in delivery order, so compare as multisets.
  std::sort(replayed.begin(), replayed.end());
  std::sort(observed.begin(), observed.end());
  CHECK(replayed == observed);
  CHECK(observed.size() > lists[1].size());
  CHECK(r.center.counters.failed_requests == 0);
}

TEST_CASE("assignments stay acyclic with at most one feeder per worker") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const testing::SyntheticTree tree(seed, 9);
    SimClusterConfig cfg;
    cfg.workers = 2 + static_cast<int>(seed % 12);
    cfg.seed = seed;
    cfg.network = SimNetworkConfig{1, 1 + static_cast<int>(seed % 15), seed};
    cfg.center.termination.timeout_s = 0.01;
    cfg.center.policy = seed % 2 ? AssignmentPolicy::Random : AssignmentPolicy::Metadata;
    cfg.worker.emit_metadata = cfg.center.policy == AssignmentPolicy::Metadata;
    SimCluster<testing::SyntheticTree> cluster(tree, cfg);
    bool acyclic = true;
    std::size_t inbound = 0;
    cluster.on_tick([&](auto& c) {
      const auto& st = static_cast<Center&>(c.coordinator()).state();
      acyclic = acyclic && st.assignments_acyclic();
      inbound = std::max(inbound, st.max_inbound());
    });
    const auto r = cluster.run();
    INFO("seed " << seed);
    REQUIRE_FALSE(r.deadlocked);
    CHECK(acyclic);
    CHECK(inbound <= 1);
    CHECK(r.center.best_value == tree.min_leaf());
  }
}
