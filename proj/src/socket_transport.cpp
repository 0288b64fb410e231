// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "dfft/socket_transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <thread>

#include "dfft/bytes.hpp"
#include "mailbox_internal.hpp"

namespace dfft::transport {
namespace wire {

std::vector<std::byte> encode_header(std::uint32_t source, std::uint32_t tag,
                                     std::uint64_t payload_len) {
  std::vector<std::byte> header;
  header.reserve(kHeaderBytes);
  for (char c : kMagic) header.push_back(static_cast<std::byte>(c));
  bytes::append_u32(header, source);
  bytes::append_u32(header, tag);
  bytes::append_u64(header, payload_len);
  return header;
}

}  // namespace wire

namespace detail {
namespace {

using wire::kHeaderBytes;
using wire::kMagic;
constexpr std::uint32_t kHelloTag = 0xFFFFFFFF;
constexpr std::uint32_t kByeTag = 0xFFFFFFFE;
constexpr std::uint32_t kAbortTag = 0xFFFFFFFD;

[[noreturn]] void sys_fail(const std::string& what) {
  raise(ErrorCode::ConfigInvalid, what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::byte* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      sys_fail("socket write failed");
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns false on clean EOF at a frame boundary.
bool read_all(int fd, std::byte* data, std::size_t n) {
  bool first = true;
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      sys_fail("socket read failed");
    }
    if (r == 0) {
      if (first) return false;
      raise(ErrorCode::TruncatedFile, "peer closed mid-frame");
    }
    first = false;
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

void send_frame(int fd, std::mutex& mu, std::uint32_t source,
                std::uint32_t tag, std::span<const std::byte> payload) {
  const auto header = wire::encode_header(source, tag, payload.size());
  std::lock_guard<std::mutex> lock(mu);
  write_all(fd, header.data(), header.size());
  if (!payload.empty()) write_all(fd, payload.data(), payload.size());
}

int make_listener(const Endpoint& ep, std::uint16_t* bound_port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) sys_fail("socket() failed");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res) {
      ::close(fd);
      raise(ErrorCode::ConfigInvalid, "cannot resolve host " + ep.host);
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    sys_fail("bind() failed for " + ep.host + ":" + std::to_string(ep.port));
  }
  if (::listen(fd, 64) != 0) {
    ::close(fd);
    sys_fail("listen() failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  *bound_port = ntohs(addr.sin_port);
  return fd;
}

int connect_with_retry(const Endpoint& ep, double timeout_s) {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_s);
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) sys_fail("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    ::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return fd;
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline) {
      raise(ErrorCode::Deadlock,
            "rendezvous timed out for " + ep.host + ":" + std::to_string(ep.port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace

/// One rank of a socket world: its own mailbox, a full TCP mesh to peers,
/// and a reader thread per connection feeding the mailbox.
class SocketNode {
 public:
  SocketNode(int world_rank, int p, int listen_fd,
             std::vector<Endpoint> endpoints, AbortState* abort,
             double timeout_s)
      : rank_(world_rank),
        p_(p),
        listen_fd_(listen_fd),
        endpoints_(std::move(endpoints)),
        abort_(abort),
        timeout_s_(timeout_s),
        box_(abort),
        send_mu_(p) {
    peer_fd_.assign(p, -1);
  }

  ~SocketNode() {
    for (int fd : peer_fd_) {
      if (fd >= 0) ::close(fd);
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
  }

  Mailbox& mailbox() { return box_; }
  double timeout() const { return timeout_s_; }

  // Lower ranks accept from higher ranks; higher ranks dial lower ranks.
  void connect_mesh() {
    for (int peer = 0; peer < rank_; ++peer) {
      const int fd = connect_with_retry(endpoints_[peer], timeout_s_);
      peer_fd_[peer] = fd;
      send_frame(fd, send_mu_[peer], static_cast<std::uint32_t>(rank_),
                 kHelloTag, {});
    }
    for (int n = 0; n < p_ - 1 - rank_; ++n) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) sys_fail("accept() failed");
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      std::byte header[kHeaderBytes];
      if (!read_all(fd, header, kHeaderBytes)) {
        raise(ErrorCode::TruncatedFile, "peer closed before hello");
      }
      check_magic(header);
      const std::uint32_t source = bytes::read_u32(std::span(header), 4);
      const std::uint32_t tag = bytes::read_u32(std::span(header), 8);
      if (tag != kHelloTag || source >= static_cast<std::uint32_t>(p_)) {
        raise(ErrorCode::BadMagic, "unexpected rendezvous frame");
      }
      peer_fd_[source] = fd;
    }
    for (int peer = 0; peer < p_; ++peer) {
      if (peer == rank_) continue;
      readers_.emplace_back([this, peer] { reader_loop(peer); });
    }
  }

  void send_to(int world_dest, const MatchKey& key,
               std::span<const std::byte> payload) {
    const std::uint32_t wire_tag =
        (key.group << 16) | static_cast<std::uint32_t>(key.tag);
    send_frame(peer_fd_[world_dest], send_mu_[world_dest],
               static_cast<std::uint32_t>(key.src_world), wire_tag, payload);
  }

  void deliver_local(const MatchKey& key, std::vector<std::byte> payload) {
    box_.deliver(key, Envelope{std::move(payload), 0.0});
  }

  void broadcast_abort(const std::string& what) {
    std::vector<std::byte> msg(what.size());
    std::memcpy(msg.data(), what.data(), what.size());
    for (int peer = 0; peer < p_; ++peer) {
      if (peer == rank_ || peer_fd_[peer] < 0) continue;
      try {
        send_frame(peer_fd_[peer], send_mu_[peer],
                   static_cast<std::uint32_t>(rank_), kAbortTag, msg);
      } catch (...) {
      }
    }
  }

  // Sends BYE to every peer, then waits for every peer's BYE (readers exit
  // on it). No app traffic can follow a BYE on its connection.
  void shutdown() {
    closing_.store(true);
    for (int peer = 0; peer < p_; ++peer) {
      if (peer == rank_ || peer_fd_[peer] < 0) continue;
      try {
        send_frame(peer_fd_[peer], send_mu_[peer],
                   static_cast<std::uint32_t>(rank_), kByeTag, {});
      } catch (...) {
      }
    }
    for (auto& t : readers_) t.join();
    readers_.clear();
  }

  std::uint32_t allocate_group_id() {
    return scoped_group_id(rank_, group_counter_);
  }

 private:
  static void check_magic(const std::byte* header) {
    for (int i = 0; i < 4; ++i) {
      if (header[i] != static_cast<std::byte>(kMagic[i])) {
        raise(ErrorCode::BadMagic, "bad frame magic");
      }
    }
  }

  void reader_loop(int peer) {
    const int fd = peer_fd_[peer];
    try {
      for (;;) {
        std::byte header[kHeaderBytes];
        if (!read_all(fd, header, kHeaderBytes)) {
          if (closing_.load() || abort_->flag.load()) return;
          raise(ErrorCode::TruncatedFile, "connection lost");
        }
        check_magic(header);
        const std::uint32_t source = bytes::read_u32(std::span(header), 4);
        const std::uint32_t tag = bytes::read_u32(std::span(header), 8);
        const std::uint64_t len = bytes::read_u64(std::span(header), 12);
        std::vector<std::byte> payload(len);
        if (len > 0 && !read_all(fd, payload.data(), len)) {
          raise(ErrorCode::TruncatedFile, "connection lost mid-payload");
        }
        if (tag == kByeTag) return;
        if (tag == kAbortTag) {
          abort_->trip(static_cast<int>(source),
                       std::string(reinterpret_cast<const char*>(payload.data()),
                                   payload.size()));
          box_.interrupt();
          return;
        }
        const MatchKey key{tag >> 16, static_cast<std::int32_t>(source),
                           static_cast<std::int32_t>(tag & 0xFFFF)};
        box_.deliver(key, Envelope{std::move(payload), 0.0});
      }
    } catch (const std::exception& e) {
      if (!closing_.load()) {
        abort_->trip(rank_, e.what());
        box_.interrupt();
      }
    }
  }

  int rank_;
  int p_;
  int listen_fd_;
  std::vector<Endpoint> endpoints_;
  AbortState* abort_;
  double timeout_s_;
  Mailbox box_;
  std::vector<int> peer_fd_;
  std::vector<std::mutex> send_mu_;
  std::vector<std::thread> readers_;
  std::atomic<bool> closing_{false};
  std::uint16_t group_counter_ = 0;
};

namespace {

class SocketComm : public Comm {
 public:
  SocketComm(SocketNode* node, std::vector<int> members, int rank,
             std::uint32_t group)
      : Comm(std::move(members), rank, group, nullptr, node->timeout()),
        node_(node) {}

  std::unique_ptr<Comm> make_subgroup(std::vector<int> world_members,
                                      int my_rank,
                                      std::uint32_t group_id) override {
    return std::make_unique<SocketComm>(node_, std::move(world_members),
                                        my_rank, group_id);
  }

  std::uint32_t allocate_group_id() override {
    return node_->allocate_group_id();
  }

 protected:
  void send_to_world_rank(int world_dest, MatchKey key,
                          std::vector<std::byte> payload,
                          double /*arrival_vtime*/) override {
    if (world_dest == key.src_world) {
      node_->deliver_local(key, std::move(payload));
      return;
    }
    node_->send_to(world_dest, key, payload);
  }

  Mailbox& my_mailbox() override { return node_->mailbox(); }

 private:
  SocketNode* node_;
};

}  // namespace

void run_socket_world(int p, std::vector<Endpoint> endpoints,
                      const WorldOptions& options,
                      const std::function<void(Comm&)>& body) {
  if (options.cost_model) {
    raise(ErrorCode::ConfigInvalid,
          "the cost model is an in-process harness feature");
  }
  if (endpoints.empty()) {
    endpoints.assign(p, Endpoint{});
  }
  if (static_cast<int>(endpoints.size()) != p) {
    raise(ErrorCode::ConfigInvalid, "need one endpoint per rank");
  }

  // Bind all listeners up front so kernel-assigned ports are known to every
  // rank before anyone dials.
  std::vector<int> listeners(p);
  for (int r = 0; r < p; ++r) {
    std::uint16_t port = 0;
    listeners[r] = make_listener(endpoints[r], &port);
    endpoints[r].port = port;
  }

  AbortState abort;
  std::vector<int> all(p);
  for (int r = 0; r < p; ++r) all[r] = r;

  std::vector<std::thread> workers;
  workers.reserve(p);
  for (int rank = 0; rank < p; ++rank) {
    workers.emplace_back([&, rank] {
      SocketNode node(rank, p, listeners[rank], endpoints, &abort,
                      options.deadlock_timeout_s);
      try {
        node.connect_mesh();
        SocketComm comm(&node, all, rank, 0);
        body(comm);
      } catch (const AbortSignal&) {
      } catch (const std::exception& e) {
        abort.trip(rank, e.what());
        node.broadcast_abort(e.what());
        node.mailbox().interrupt();
      } catch (...) {
        abort.trip(rank, "unknown exception");
        node.broadcast_abort("unknown exception");
        node.mailbox().interrupt();
      }
      node.shutdown();
    });
  }
  for (auto& w : workers) w.join();
  if (abort.flag.load()) {
    auto [rank, what] = abort.info();
    raise(ErrorCode::WorkerPanic,
          "rank " + std::to_string(rank) + " failed: " + what);
  }
}

}  // namespace detail

std::vector<Endpoint> parse_endpoints(const std::string& list) {
  std::vector<Endpoint> endpoints;
  std::size_t start = 0;
  while (start < list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string::npos) comma = list.size();
    const std::string entry = list.substr(start, comma - start);
    const std::size_t colon = entry.rfind(':');
    if (colon == std::string::npos) {
      raise(ErrorCode::ConfigInvalid, "endpoint must be host:port: " + entry);
    }
    Endpoint ep;
    ep.host = entry.substr(0, colon);
    ep.port = static_cast<std::uint16_t>(std::stoi(entry.substr(colon + 1)));
    endpoints.push_back(std::move(ep));
    start = comma + 1;
  }
  return endpoints;
}

}  // namespace dfft::transport
