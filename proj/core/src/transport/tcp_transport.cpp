#include "semilb/transport/tcp_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace semilb {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) fail("fcntl");
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

sockaddr_in resolve(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res); rc != 0 || res == nullptr) {
    throw TransportError("cannot resolve host '" + host + "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  return addr;
}

void write_all_blocking(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

void read_all_blocking(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::recv(fd, data, size, 0);
    if (n == 0) throw TransportError("peer closed during handshake");
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("recv");
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

}  // namespace

RankFile::RankFile(std::vector<RankAddress> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw TransportError("rank file lists no ranks");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].rank.value != static_cast<int>(i)) {
      throw TransportError("rank file must list ranks 0..p exactly once");
    }
  }
}

RankFile RankFile::parse(std::string_view text) {
  std::vector<RankAddress> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream fields(line);
    RankAddress a;
    if (!(fields >> a.rank.value >> a.host >> a.port) || a.port <= 0 || a.port > 65535) {
      throw TransportError("rank file line " + std::to_string(line_no) + ": expected 'rank host port'");
    }
    entries.push_back(std::move(a));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.rank < y.rank; });
  return RankFile(std::move(entries));
}

RankFile RankFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open rank file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const RankAddress& RankFile::at(Rank rank) const {
  if (rank.value < 0 || rank.value >= static_cast<int>(entries_.size())) {
    throw TransportError("rank " + std::to_string(rank.value) + " not in rank file");
  }
  return entries_[static_cast<std::size_t>(rank.value)];
}

std::string RankFile::to_string() const {
  std::string out;
  for (const auto& e : entries_) {
    out += std::to_string(e.rank.value) + " " + e.host + " " + std::to_string(e.port) + "\n";
  }
  return out;
}

std::vector<int> pick_free_ports(int count) {
  std::vector<int> fds;
  std::vector<int> ports;
  for (int i = 0; i < count; ++i) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail("socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) fail("bind");
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ports.push_back(ntohs(addr.sin_port));
    fds.push_back(fd);
  }
  for (int fd : fds) ::close(fd);
  return ports;
}

std::optional<Rank> rank_from_environment() {
  const char* env = std::getenv("SEMILB_RANK");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return Rank{std::atoi(env)};
}

TcpEndpoint::TcpEndpoint(const RankFile& ranks, Rank self, std::chrono::milliseconds connect_timeout,
                         std::size_t max_payload)
    : self_(self), workers_(ranks.worker_count()), max_payload_(max_payload) {
  const auto n = static_cast<std::size_t>(workers_) + 1;
  peers_.resize(n);
  const RankAddress& me = ranks.at(self);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in bind_addr = resolve(me.host, me.port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&bind_addr), sizeof(bind_addr)) < 0) {
    fail("bind rank " + std::to_string(self.value) + " port " + std::to_string(me.port));
  }
  if (::listen(listen_fd_, static_cast<int>(n) + 8) < 0) fail("listen");

  const auto deadline = std::chrono::steady_clock::now() + connect_timeout;

  for (int r = 0; r < self.value; ++r) {
    const RankAddress& peer = ranks.at(Rank{r});
    const sockaddr_in addr = resolve(peer.host, peer.port);
    int fd = -1;
    while (true) {
      fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) fail("socket");
      if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) break;
      ::close(fd);
      if (std::chrono::steady_clock::now() > deadline) {
        throw TransportError("rank " + std::to_string(self.value) + ": timed out dialing rank " +
                             std::to_string(r));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    Bytes hello;
    payload::put_u16(hello, static_cast<std::uint16_t>(self.value));
    write_all_blocking(fd, hello.data(), hello.size());
    peers_[static_cast<std::size_t>(r)].fd = fd;
  }

  for (int accepted = self.value + 1; accepted <= workers_; ++accepted) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0 || ::poll(&pfd, 1, static_cast<int>(left.count())) <= 0) {
      throw TransportError("rank " + std::to_string(self.value) + ": timed out waiting for peers");
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) fail("accept");
    std::uint8_t hello[2];
    read_all_blocking(fd, hello, 2);
    const int who = hello[0] | (hello[1] << 8);
    if (who <= self.value || who > workers_ || peers_[static_cast<std::size_t>(who)].fd >= 0) {
      ::close(fd);
      throw TransportError("unexpected hello from rank " + std::to_string(who));
    }
    peers_[static_cast<std::size_t>(who)].fd = fd;
  }

  for (std::size_t r = 0; r < n; ++r) {
    if (static_cast<int>(r) == self.value) continue;
    set_nonblocking(peers_[r].fd);
    set_nodelay(peers_[r].fd);
  }
}

TcpEndpoint::~TcpEndpoint() {
  flush(std::chrono::milliseconds(2000));
  for (auto& p : peers_) {
    if (p.fd >= 0) ::close(p.fd);
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpEndpoint::send_async(Rank dest, Tag tag, Bytes payload) {
  if (dest.value < 0 || dest.value > workers_) {
    throw TransportError("send to nonexistent rank " + std::to_string(dest.value));
  }
  validate_payload(tag, payload.size(), max_payload_);
  Message m{tag, self_, std::move(payload)};
  if (dest == self_) {
    ready_.push_back(std::move(m));
    return;
  }
  Peer& peer = peers_[static_cast<std::size_t>(dest.value)];
  if (peer.closed) throw TransportError("connection to rank " + std::to_string(dest.value) + " closed");
  const Bytes frame = encode_frame(m);
  peer.outbound.insert(peer.outbound.end(), frame.begin(), frame.end());
  pump_outbound(peer);
}

void TcpEndpoint::pump_outbound(Peer& peer) {
  while (peer.out_offset < peer.outbound.size()) {
    const ssize_t n = ::send(peer.fd, peer.outbound.data() + peer.out_offset,
                             peer.outbound.size() - peer.out_offset, MSG_NOSIGNAL | MSG_DONTWAIT);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) return;
      peer.closed = true;
      fail("send");
    }
    peer.out_offset += static_cast<std::size_t>(n);
  }
  peer.outbound.clear();
  peer.out_offset = 0;
}

void TcpEndpoint::pump_inbound(Peer& peer, Rank who) {
  std::uint8_t chunk[1 << 16];
  while (!peer.closed) {
    const ssize_t n = ::recv(peer.fd, chunk, sizeof(chunk), MSG_DONTWAIT);
    if (n == 0) {
      peer.closed = true;
      break;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) break;
      peer.closed = true;
      fail("recv from rank " + std::to_string(who.value));
    }
    peer.inbound.insert(peer.inbound.end(), chunk, chunk + n);
  }
  std::size_t offset = 0;
  while (auto frame = decode_frame(std::span(peer.inbound).subspan(offset), max_payload_)) {
    if (frame->message.source != who) {
      throw ProtocolError("frame from rank " + std::to_string(who.value) + " claims source " +
                          std::to_string(frame->message.source.value));
    }
    offset += frame->consumed;
    ready_.push_back(std::move(frame->message));
  }
  peer.inbound.erase(peer.inbound.begin(), peer.inbound.begin() + static_cast<std::ptrdiff_t>(offset));
}

std::optional<Message> TcpEndpoint::try_receive() {
  for (auto& p : peers_) {
    if (p.fd >= 0 && !p.outbound.empty() && !p.closed) pump_outbound(p);
  }
  if (ready_.empty()) {
    // Round-robin so one chatty peer cannot starve the others.
    const std::size_t n = peers_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = (next_peer_ + i) % n;
      if (static_cast<int>(r) == self_.value || peers_[r].fd < 0) continue;
      pump_inbound(peers_[r], Rank{static_cast<int>(r)});
    }
    next_peer_ = (next_peer_ + 1) % n;
  }
  if (ready_.empty()) return std::nullopt;
  Message m = std::move(ready_.front());
  ready_.pop_front();
  return m;
}

bool TcpEndpoint::flush(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    bool pending = false;
    for (auto& p : peers_) {
      if (p.fd < 0 || p.closed || p.outbound.empty()) continue;
      try {
        pump_outbound(p);
      } catch (const TransportError&) {
        continue;
      }
      pending = pending || !p.outbound.empty();
    }
    if (!pending) return true;
    if (std::chrono::steady_clock::now() > deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

}  // namespace semilb
