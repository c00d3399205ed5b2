#include "semilb/transport/sim_transport.hpp"

#include <algorithm>
#include <string>

namespace semilb {

int SimEndpoint::worker_count() const { return network_->worker_count(); }

void SimEndpoint::send_async(Rank dest, Tag tag, Bytes payload) {
  if (closed_) throw TransportError("rank " + std::to_string(rank_.value) + ": endpoint closed");
  network_->post(rank_, dest, tag, std::move(payload));
}

std::optional<Message> SimEndpoint::try_receive() {
  if (closed_) throw TransportError("rank " + std::to_string(rank_.value) + ": endpoint closed");
  if (inbox_.empty()) return std::nullopt;
  Message m = std::move(inbox_.front());
  inbox_.pop_front();
  return m;
}

std::vector<Delivery> SimEndpoint::sim_advance(int ticks) { return network_->advance(ticks); }

SimNetwork::SimNetwork(int workers, SimNetworkConfig config)
    : workers_(workers), config_(config), rng_(config.seed) {
  if (workers < 0) throw ContractViolation("worker count must be non-negative");
  if (config.min_delay < 0 || config.max_delay < config.min_delay) {
    throw ContractViolation("invalid simulated delay range");
  }
  const auto ranks = static_cast<std::size_t>(workers) + 1;
  endpoints_.reserve(ranks);
  for (int r = 0; r <= workers; ++r) endpoints_.push_back(std::make_unique<SimEndpoint>(*this, Rank{r}));
  last_tick_.assign(ranks * ranks, 0);
}

SimEndpoint& SimNetwork::endpoint(Rank rank) {
  if (rank.value < 0 || rank.value > workers_) throw ContractViolation("rank out of range");
  return *endpoints_[static_cast<std::size_t>(rank.value)];
}

void SimNetwork::post(Rank source, Rank dest, Tag tag, Bytes payload) {
  if (dest.value < 0 || dest.value > workers_) {
    throw TransportError("send to nonexistent rank " + std::to_string(dest.value));
  }
  validate_payload(tag, payload.size(), config_.max_payload);
  Message message{tag, source, std::move(payload)};

  std::uniform_int_distribution<int> dist(config_.min_delay, config_.max_delay);
  int delay = dist(rng_);
  if (override_) {
    if (auto forced = override_(message, dest, delay)) delay = std::max(0, *forced);
  }

  const auto ranks = static_cast<std::size_t>(workers_) + 1;
  auto& last = last_tick_[static_cast<std::size_t>(source.value) * ranks + static_cast<std::size_t>(dest.value)];
  const std::int64_t tick = std::max(now_ + delay, last);
  last = tick;

  in_flight_.emplace(Key{tick, source.value, sequence_++}, InFlight{dest, tag, encode_frame(message)});
}

void SimNetwork::deliver_due(std::vector<Delivery>& out) {
  while (!in_flight_.empty() && std::get<0>(in_flight_.begin()->first) <= now_) {
    auto node = in_flight_.extract(in_flight_.begin());
    InFlight& entry = node.mapped();
    auto decoded = decode_frame(entry.frame, config_.max_payload);
    if (!decoded || decoded->consumed != entry.frame.size()) {
      throw ProtocolError("simulated frame failed to decode");
    }
    SimEndpoint& target = *endpoints_[static_cast<std::size_t>(entry.dest.value)];
    Delivery d{std::get<0>(node.key()), entry.dest, decoded->message};
    if (config_.record_trace) trace_.push_back(d);
    target.inbox_.push_back(std::move(decoded->message));
    out.push_back(std::move(d));
  }
}

std::vector<Delivery> SimNetwork::advance(int ticks) {
  std::vector<Delivery> out;
  for (int i = 0; i < ticks; ++i) {
    ++now_;
    deliver_due(out);
  }
  return out;
}

std::vector<Delivery> SimNetwork::advance_to(std::int64_t tick) {
  std::vector<Delivery> out;
  if (tick <= now_) return out;
  // Deliveries between now and tick happen in order, clock lands on tick.
  while (!in_flight_.empty() && std::get<0>(in_flight_.begin()->first) <= tick) {
    now_ = std::max(now_, std::get<0>(in_flight_.begin()->first));
    deliver_due(out);
  }
  now_ = tick;
  return out;
}

std::optional<std::int64_t> SimNetwork::next_delivery_tick() const {
  if (in_flight_.empty()) return std::nullopt;
  return std::get<0>(in_flight_.begin()->first);
}

std::size_t SimNetwork::in_flight(Tag tag) const {
  return static_cast<std::size_t>(std::count_if(in_flight_.begin(), in_flight_.end(),
                                                [tag](const auto& kv) { return kv.second.tag == tag; }));
}

bool SimNetwork::idle() const {
  if (!in_flight_.empty()) return false;
  return std::none_of(endpoints_.begin(), endpoints_.end(),
                      [](const auto& ep) { return ep->has_pending(); });
}

}  // namespace semilb
