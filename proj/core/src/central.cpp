#include "semilb/central.hpp"

#include <algorithm>
#include <string>

namespace semilb {

PushDecision worker_push_policy(QueueFlag last_known_flag) {
  return last_known_flag == QueueFlag::Open ? PushDecision::PushToCenter : PushDecision::KeepLocal;
}

CentralQueueState::CentralQueueState(CentralConfig config)
    : workers(config.workers),
      status(static_cast<std::size_t>(config.workers) + 1, WorkerStatus::Available),
      config_(config),
      task_limit_(config.tasks_per_worker * config.workers),
      queue_(Order{config.fifo}) {
  if (config.workers < 1) throw ContractViolation("the baseline needs at least one worker");
  if (config.hysteresis <= 0.0 || config.hysteresis > 1.0) {
    throw ContractViolation("hysteresis must lie in (0, 1]");
  }
}

std::optional<QueueFlag> CentralQueueState::push(Value priority, Bytes task) {
  bytes_ += task.size();
  queue_.push(QueuedTask{priority, sequence_++, std::move(task)});
  ++size_;
  max_size_ = std::max(max_size_, size_);
  return update_flag();
}

std::optional<QueuedTask> CentralQueueState::pop() {
  if (queue_.empty()) return std::nullopt;
  QueuedTask top = queue_.top();
  queue_.pop();
  --size_;
  bytes_ -= top.task.size();
  return top;
}

std::optional<QueueFlag> CentralQueueState::update_flag() {
  const auto limit = static_cast<double>(task_limit_);
  const auto memory = static_cast<double>(config_.memory_limit);
  if (flag_ == QueueFlag::Open) {
    if (static_cast<double>(size_) > limit || static_cast<double>(bytes_) > memory) {
      flag_ = QueueFlag::Full;
      flag_history.push_back(Tag::QueueFull);
      return flag_;
    }
  } else if (static_cast<double>(size_) <= config_.hysteresis * limit &&
             static_cast<double>(bytes_) <= config_.hysteresis * memory) {
    flag_ = QueueFlag::Open;
    flag_history.push_back(Tag::QueueOpen);
    return flag_;
  }
  return std::nullopt;
}

namespace {

Outgoing flag_broadcast(QueueFlag flag) {
  return {Rank{}, flag == QueueFlag::Full ? Tag::QueueFull : Tag::QueueOpen, {}, true};
}

}  // namespace

std::vector<Outgoing> center_dispatch(CentralQueueState& state) {
  std::vector<Outgoing> out;
  for (int w = 1; w <= state.workers && !state.empty(); ++w) {
    auto& s = state.status[static_cast<std::size_t>(w)];
    if (s != WorkerStatus::Available) continue;
    QueuedTask task = *state.pop();
    out.push_back({Rank{w}, Tag::Work, std::move(task.task)});
    s = WorkerStatus::Running;
    ++state.in_flight;
  }
  if (auto flag = state.update_flag()) out.push_back(flag_broadcast(*flag));
  return out;
}

TerminationDecision central_termination(const CentralQueueState& state) {
  if (!state.empty() || state.in_flight != 0) return TerminationDecision::Resume;
  for (int w = 1; w <= state.workers; ++w) {
    if (state.status[static_cast<std::size_t>(w)] != WorkerStatus::Available) return TerminationDecision::Resume;
  }
  return TerminationDecision::Terminate;
}

CentralCenter::CentralCenter(CentralConfig config) : state_(config) {}

void CentralCenter::emit(Endpoint& endpoint, const Outgoing& out) {
  if (out.broadcast) {
    endpoint.broadcast_async(out.tag, out.payload);
    counters_.sent[tag_index(out.tag)] += static_cast<std::uint64_t>(state_.workers);
  } else {
    endpoint.send_async(out.dest, out.tag, out.payload);
    ++counters_.sent[tag_index(out.tag)];
  }
}

void CentralCenter::start(Endpoint& endpoint, double /*now*/) {
  if (endpoint.worker_count() != state_.workers) {
    throw ContractViolation("baseline configured for " + std::to_string(state_.workers) +
                            " workers, endpoint has " + std::to_string(endpoint.worker_count()));
  }
  state_.status[1] = WorkerStatus::Running;
  ++state_.in_flight;
  emit(endpoint, {Rank{1}, Tag::Work, {}});
}

bool CentralCenter::poll(Endpoint& endpoint, double /*now*/) {
  if (phase_ == Phase::Done) return false;
  bool processed = false;
  while (auto message = endpoint.try_receive()) {
    processed = true;
    const Message& m = *message;
    ++counters_.received[tag_index(m.tag)];
    if (m.source.value < 1 || m.source.value > state_.workers) {
      throw ProtocolError("baseline center: message from out-of-range rank " + std::to_string(m.source.value));
    }
    switch (m.tag) {
      case Tag::TaskPush: {
        const Value priority = payload::as_value(m);
        const auto tail = payload::tail_after_value(m);
        ++pushes_;
        // The flag change must reach the pusher before its ack does.
        if (auto flag = state_.push(priority, Bytes(tail.begin(), tail.end()))) {
          emit(endpoint, flag_broadcast(*flag));
        }
        emit(endpoint, {m.source, Tag::TaskAck, {}});
        break;
      }
      case Tag::TaskAck:
        if (--state_.in_flight < 0) throw ProtocolError("baseline center: unexpected TASK_ACK");
        break;
      case Tag::Available:
        if (state_.status[static_cast<std::size_t>(m.source.value)] != WorkerStatus::Running) {
          ++counters_.failed_requests;
        }
        state_.status[static_cast<std::size_t>(m.source.value)] = WorkerStatus::Available;
        break;
      case Tag::BestvalUpdate:
        if (best_.offer(payload::as_value(m), m.source)) {
          emit(endpoint, {Rank{}, Tag::BestvalUpdate, payload::value(best_.value), true});
          ++counters_.bestval_broadcasts;
        }
        break;
      case Tag::Solution:
        if (phase_ == Phase::Fetching && best_.holder && m.source == *best_.holder) {
          const auto tail = payload::tail_after_value(m);
          solution_ = Bytes(tail.begin(), tail.end());
          finish(endpoint);
        }
        break;
      case Tag::Metadata:
      case Tag::StartedRunning:
        break;
      default:
        throw ProtocolError("baseline center: unexpected " + std::string(tag_name(m.tag)));
    }
  }
  if (phase_ != Phase::Running) return processed;

  for (const Outgoing& out : center_dispatch(state_)) emit(endpoint, out);

  if (central_termination(state_) == TerminationDecision::Terminate) {
    ++counters_.termination_attempts;
    if (best_.holder) {
      phase_ = Phase::Fetching;
      emit(endpoint, {*best_.holder, Tag::SolutionRequest, {}});
    } else {
      finish(endpoint);
    }
  }
  return processed;
}

void CentralCenter::finish(Endpoint& endpoint) {
  emit(endpoint, {Rank{}, Tag::Shutdown, {}, true});
  phase_ = Phase::Done;
}

FinalResult CentralCenter::result() const {
  FinalResult r;
  r.best_value = best_.value;
  r.best_holder = best_.holder;
  r.solution = solution_;
  r.counters = counters_;
  r.best_trace = best_.trace;
  r.tasks_sent = pushes_;
  r.tasks_received = pushes_;
  r.max_queue_size = state_.max_size();
  r.flag_broadcasts = state_.flag_history;
  return r;
}

}  // namespace semilb
