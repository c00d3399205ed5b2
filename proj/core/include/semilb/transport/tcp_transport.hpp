#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semilb/transport/endpoint.hpp"

namespace semilb {

struct RankAddress {
  Rank rank{};
  std::string host;
  int port = 0;
};

/// Parsed rank file: one "rank host port" line per rank, ranks 0..p each exactly once.
class RankFile {
 public:
  static RankFile parse(std::string_view text);
  static RankFile load(const std::filesystem::path& path);

  [[nodiscard]] const RankAddress& at(Rank rank) const;
  [[nodiscard]] int worker_count() const { return static_cast<int>(entries_.size()) - 1; }
  [[nodiscard]] std::string to_string() const;

  explicit RankFile(std::vector<RankAddress> entries);

 private:
  std::vector<RankAddress> entries_;  // indexed by rank
};

/// Picks `count` currently free TCP ports on the loopback interface.
std::vector<int> pick_free_ports(int count);

/// Rank taken from the SEMILB_RANK environment variable, if set.
std::optional<Rank> rank_from_environment();

/// Full-mesh TCP endpoint. Every rank listens on its own port, dials all lower
/// ranks and accepts all higher ones; a 2-byte hello identifies the dialer.
/// After setup every socket is non-blocking and sends are buffered locally.
class TcpEndpoint final : public Endpoint {
 public:
  static constexpr auto kDefaultConnectTimeout = std::chrono::seconds(30);

  TcpEndpoint(const RankFile& ranks, Rank self,
              std::chrono::milliseconds connect_timeout = kDefaultConnectTimeout,
              std::size_t max_payload = kDefaultMaxPayload);
  ~TcpEndpoint() override;

  TcpEndpoint(const TcpEndpoint&) = delete;
  TcpEndpoint& operator=(const TcpEndpoint&) = delete;

  [[nodiscard]] Rank rank() const override { return self_; }
  [[nodiscard]] int worker_count() const override { return workers_; }
  void send_async(Rank dest, Tag tag, Bytes payload) override;
  [[nodiscard]] std::optional<Message> try_receive() override;

  /// Blocks until all buffered outbound bytes are written or the timeout expires.
  bool flush(std::chrono::milliseconds timeout);

 private:
  struct Peer {
    int fd = -1;
    Bytes outbound;
    std::size_t out_offset = 0;
    Bytes inbound;
    bool closed = false;
  };

  void pump_outbound(Peer& peer);
  void pump_inbound(Peer& peer, Rank who);

  Rank self_;
  int workers_;
  std::size_t max_payload_;
  int listen_fd_ = -1;
  std::vector<Peer> peers_;  // indexed by rank; self slot unused
  std::deque<Message> ready_;
  std::size_t next_peer_ = 0;
};

}  // namespace semilb
