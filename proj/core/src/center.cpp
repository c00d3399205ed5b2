#include "semilb/center.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>

namespace semilb {

CenterState::CenterState(int workers_, std::uint64_t seed, AssignmentPolicy policy_)
    : workers(workers_),
      status(static_cast<std::size_t>(workers_) + 1, WorkerStatus::Available),
      metadata(static_cast<std::size_t>(workers_) + 1),
      feeds(static_cast<std::size_t>(workers_) + 1),
      fed_by(static_cast<std::size_t>(workers_) + 1),
      policy(policy_),
      rng(seed) {
  if (workers_ < 1) throw ContractViolation("the center needs at least one worker");
}

bool CenterState::all_idle() const {
  for (int w = 1; w <= workers; ++w) {
    if (status[static_cast<std::size_t>(w)] == WorkerStatus::Running) return false;
  }
  return true;
}

void CenterState::assign(Rank sender, Rank receiver) {
  clear_inbound(receiver);
  feeds[static_cast<std::size_t>(sender.value)].push_back(receiver);
  fed_by[static_cast<std::size_t>(receiver.value)] = sender;
}

void CenterState::clear_inbound(Rank receiver) {
  auto& from = fed_by[static_cast<std::size_t>(receiver.value)];
  if (!from) return;
  auto& list = feeds[static_cast<std::size_t>(from->value)];
  list.erase(std::remove(list.begin(), list.end(), receiver), list.end());
  from.reset();
}

bool CenterState::chain_reaches(Rank from, Rank target) const {
  std::vector<char> seen(static_cast<std::size_t>(workers) + 1, 0);
  std::vector<Rank> stack{from};
  while (!stack.empty()) {
    const Rank r = stack.back();
    stack.pop_back();
    if (r == target) return true;
    if (seen[static_cast<std::size_t>(r.value)]) continue;
    seen[static_cast<std::size_t>(r.value)] = 1;
    for (Rank next : feeds[static_cast<std::size_t>(r.value)]) stack.push_back(next);
  }
  return false;
}

bool CenterState::assignments_acyclic() const {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> mark(static_cast<std::size_t>(workers) + 1, 0);
  std::function<bool(int)> visit = [&](int r) {
    mark[static_cast<std::size_t>(r)] = 1;
    for (Rank next : feeds[static_cast<std::size_t>(r)]) {
      const int m = mark[static_cast<std::size_t>(next.value)];
      if (m == 1) return false;
      if (m == 0 && !visit(next.value)) return false;
    }
    mark[static_cast<std::size_t>(r)] = 2;
    return true;
  };
  for (int r = 1; r <= workers; ++r) {
    if (mark[static_cast<std::size_t>(r)] == 0 && !visit(r)) return false;
  }
  return true;
}

std::size_t CenterState::max_inbound() const {
  std::vector<std::size_t> in(static_cast<std::size_t>(workers) + 1, 0);
  std::size_t best = 0;
  for (const auto& list : feeds) {
    for (Rank r : list) best = std::max(best, ++in[static_cast<std::size_t>(r.value)]);
  }
  return best;
}

std::optional<Rank> get_next_working_node(CenterState& state, Rank requester) {
  std::vector<Rank> eligible;
  for (int w = 1; w <= state.workers; ++w) {
    const Rank candidate{w};
    if (candidate == requester || state.status_of(candidate) != WorkerStatus::Running) continue;
    if (state.chain_reaches(requester, candidate)) continue;
    eligible.push_back(candidate);
  }
  if (eligible.empty()) return std::nullopt;

  if (state.policy == AssignmentPolicy::Metadata) {
    auto meta = [&](Rank r) {
      return state.metadata[static_cast<std::size_t>(r.value)].value_or(std::numeric_limits<std::int64_t>::min());
    };
    return *std::max_element(eligible.begin(), eligible.end(),
                             [&](Rank a, Rank b) { return meta(a) < meta(b); });
  }
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  return eligible[pick(state.rng)];
}

std::vector<Outgoing> handle_center_message(CenterState& state, const Message& message) {
  const Rank source = message.source;
  if (!state.valid_worker(source)) {
    throw ProtocolError("center: message from out-of-range rank " + std::to_string(source.value));
  }
  std::vector<Outgoing> out;
  switch (message.tag) {
    case Tag::BestvalUpdate: {
      const Value v = payload::as_value(message);
      if (state.best.offer(v, source)) {
        out.push_back({Rank{}, Tag::BestvalUpdate, payload::value(v), true});
        ++state.counters.bestval_broadcasts;
      }
      break;
    }
    case Tag::Available: {
      if (state.status_of(source) != WorkerStatus::Running) ++state.counters.failed_requests;
      if (auto w = get_next_working_node(state, source)) {
        out.push_back({*w, Tag::SendWork, payload::rank(source)});
        state.set_status(source, WorkerStatus::Assigned);
        state.assign(*w, source);
        ++state.counters.reassignments;
      } else {
        state.set_status(source, WorkerStatus::Available);
      }
      break;
    }
    case Tag::StartedRunning: {
      state.set_status(source, WorkerStatus::Running);
      state.clear_inbound(source);
      for (int w = 1; w <= state.workers; ++w) {
        const Rank idle{w};
        if (state.status_of(idle) != WorkerStatus::Available) continue;
        if (state.chain_reaches(idle, source)) continue;
        out.push_back({source, Tag::SendWork, payload::rank(idle)});
        state.set_status(idle, WorkerStatus::Assigned);
        state.assign(source, idle);
        ++state.counters.reassignments;
        break;
      }
      break;
    }
    case Tag::Metadata:
      state.metadata[static_cast<std::size_t>(source.value)] = payload::as_value(message);
      break;
    default:
      break;
  }
  return out;
}

Center::Center(CenterConfig config)
    : config_(config), state_(config.workers, config.seed, config.policy) {}

void Center::emit(Endpoint& endpoint, const Outgoing& out) {
  if (out.broadcast) {
    endpoint.broadcast_async(out.tag, out.payload);
    state_.counters.sent[tag_index(out.tag)] += static_cast<std::uint64_t>(state_.workers);
  } else {
    endpoint.send_async(out.dest, out.tag, out.payload);
    ++state_.counters.sent[tag_index(out.tag)];
  }
}

void Center::start(Endpoint& endpoint, double /*now*/) {
  if (endpoint.worker_count() != config_.workers) {
    throw ContractViolation("center configured for " + std::to_string(config_.workers) +
                            " workers, endpoint has " + std::to_string(endpoint.worker_count()));
  }
  for (int w = 2; w <= config_.workers; ++w) state_.set_status(Rank{w}, WorkerStatus::Available);
  state_.set_status(Rank{1}, WorkerStatus::Running);

  if (config_.use_waiting_lists && config_.workers > 1) {
    const auto lists = build_waiting_lists(config_.max_branching, config_.workers);
    for (int w = 1; w <= config_.workers; ++w) {
      for (Rank q : lists[static_cast<std::size_t>(w)]) {
        state_.assign(Rank{w}, q);
        state_.set_status(q, WorkerStatus::Assigned);
        emit(endpoint, {Rank{w}, Tag::SendWork, payload::rank(q)});
      }
    }
  }
  // Empty WORK: rank 1 builds the seed from the instance it loaded.
  emit(endpoint, {Rank{1}, Tag::Work, {}});
}

void Center::begin_termination(Endpoint& endpoint, double now) {
  ++state_.counters.termination_attempts;
  if (config_.termination.use_timeout && config_.termination.timeout_s > 0) {
    phase_ = Phase::Quiescing;
    deadline_ = now + config_.termination.timeout_s;
  } else {
    start_vote(endpoint);
  }
}

void Center::start_vote(Endpoint& endpoint) {
  phase_ = Phase::Voting;
  replies_ = 0;
  refused_ = false;
  dirty_ = false;
  round_sent_ = 0;
  round_received_ = 0;
  ++state_.counters.vote_rounds;
  emit(endpoint, {Rank{}, Tag::Terminate, {}, true});
}

void Center::conclude_vote(Endpoint& endpoint) {
  if (refused_ || dirty_) {
    phase_ = Phase::Running;
    previous_round_.reset();
    last_decision_ = TerminationDecision::Resume;
    ++state_.counters.termination_cancellations;
    return;
  }
  const std::pair<std::int64_t, std::int64_t> sums{round_sent_, round_received_};
  if (config_.termination.confirm_with_counters) {
    // Counting alone cannot see a task that is received after its receiver
    // already voted, so a second identical round is required.
    if (!previous_round_ || *previous_round_ != sums || sums.first != sums.second) {
      previous_round_ = sums;
      start_vote(endpoint);
      return;
    }
  }
  previous_round_ = sums;
  last_decision_ = TerminationDecision::Terminate;
  if (state_.best.holder) {
    phase_ = Phase::Fetching;
    emit(endpoint, {*state_.best.holder, Tag::SolutionRequest, {}});
  } else {
    finish(endpoint);
  }
}

void Center::finish(Endpoint& endpoint) {
  emit(endpoint, {Rank{}, Tag::Shutdown, {}, true});
  phase_ = Phase::Done;
}

bool Center::poll(Endpoint& endpoint, double now) {
  if (phase_ == Phase::Done) return false;
  bool processed = false;
  while (auto message = endpoint.try_receive()) {
    processed = true;
    const Message& m = *message;
    ++state_.counters.received[tag_index(m.tag)];
    if (!state_.valid_worker(m.source)) {
      throw ProtocolError("center: message from out-of-range rank " + std::to_string(m.source.value));
    }
    switch (m.tag) {
      case Tag::TerminateAccept:
      case Tag::TerminateRefuse: {
        if (phase_ != Phase::Voting) throw ProtocolError("center: vote reply outside a vote");
        ++replies_;
        if (m.tag == Tag::TerminateRefuse) {
          refused_ = true;
        } else {
          const auto [sent, received] = payload::as_counters(m);
          round_sent_ += sent;
          round_received_ += received;
        }
        if (replies_ == state_.workers) conclude_vote(endpoint);
        break;
      }
      case Tag::Solution:
        if (phase_ == Phase::Fetching && state_.best.holder && m.source == *state_.best.holder) {
          const auto tail = payload::tail_after_value(m);
          solution_ = Bytes(tail.begin(), tail.end());
          finish(endpoint);
        }
        break;
      case Tag::TaskAck:
        break;  // rank 1 acknowledging the seed
      case Tag::StartedRunning:
        if (phase_ == Phase::Quiescing) {
          phase_ = Phase::Running;
          last_decision_ = TerminationDecision::Resume;
          ++state_.counters.termination_cancellations;
        } else if (phase_ == Phase::Voting) {
          dirty_ = true;
        }
        [[fallthrough]];
      default:
        for (const Outgoing& out : handle_center_message(state_, m)) emit(endpoint, out);
        break;
    }
  }

  if (phase_ == Phase::Running && state_.all_idle()) {
    begin_termination(endpoint, now);
  }
  if (phase_ == Phase::Quiescing) {
    if (!state_.all_idle()) {
      phase_ = Phase::Running;
    } else if (now >= deadline_) {
      start_vote(endpoint);
    }
  }
  return processed;
}

std::optional<double> Center::wake_time() const {
  if (phase_ == Phase::Quiescing) return deadline_;
  return std::nullopt;
}

FinalResult Center::result() const {
  FinalResult r;
  r.best_value = state_.best.value;
  r.best_holder = state_.best.holder;
  r.solution = solution_;
  r.counters = state_.counters;
  r.best_trace = state_.best.trace;
  if (previous_round_) {
    r.tasks_sent = previous_round_->first;
    r.tasks_received = previous_round_->second;
  }
  return r;
}

}  // namespace semilb
