// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dfft/errors.hpp"

namespace dfft::transport {

/// Constants of the simulated machine. Virtual time advances by
/// latency + bytes*inv_bandwidth per message, bytes*staging_inv_bandwidth per
/// staging copy (the stand-in for the PCIe hop), and flops*flop_time for
/// modeled compute. Overlapping operations advance the max, not the sum.
struct CostModel {
  double latency = 0.0;
  double inv_bandwidth = 0.0;
  double staging_inv_bandwidth = 0.0;
  double flop_time = 0.0;
  double memcpy_inv_bandwidth = 0.0;  // pack/unpack and other host copies
};

/// Per-rank virtual clock. Owned and advanced only by the rank's own worker;
/// arrival stamps computed here ride on the message envelope, which keeps the
/// accounting deterministic under any thread interleaving.
class Clock {
 public:
  explicit Clock(const CostModel& model) : model_(model) {}

  double now() const { return now_; }
  const CostModel& model() const { return model_; }

  void add_compute(double flops) { now_ += flops * model_.flop_time; }

  void add_staging_copy(std::size_t bytes) {
    now_ += static_cast<double>(bytes) * model_.staging_inv_bandwidth;
  }

  void add_host_copy(std::size_t bytes) {
    now_ += static_cast<double>(bytes) * model_.memcpy_inv_bandwidth;
  }

  /// now = max(now, t); returns the idle time spent waiting.
  double advance_to(double t) {
    const double idle = t > now_ ? t - now_ : 0.0;
    if (t > now_) now_ = t;
    return idle;
  }

  /// Serialize a send on this rank's egress link. Returns {arrival time at
  /// the destination, egress completion time (staging buffer reusable)}.
  std::pair<double, double> send_departure(std::size_t bytes) {
    const double start = egress_busy_ > now_ ? egress_busy_ : now_;
    const double wire = static_cast<double>(bytes) * model_.inv_bandwidth;
    egress_busy_ = start + wire;
    return {start + model_.latency + wire, egress_busy_};
  }

 private:
  CostModel model_;
  double now_ = 0.0;
  double egress_busy_ = 0.0;
};

namespace detail {

struct MatchKey {
  std::uint32_t group;
  std::int32_t src_world;
  std::int32_t tag;
  auto operator<=>(const MatchKey&) const = default;
};

struct Envelope {
  std::vector<std::byte> payload;
  double arrival_vtime = 0.0;
};

struct RecvState;
class Mailbox;

}  // namespace detail

// Wire/tag budget: user tags fit 15 bits, group ids 16 bits, so a message key
// muxes into the socket frame's single u32 tag field.
constexpr int kMaxUserTag = 0x7FFF;
constexpr int kInternalTagBase = 0x8000;  // collectives
constexpr std::uint32_t kMaxGroups = 0xFFFF;

class Comm;

class PendingRecv {
 public:
  PendingRecv() = default;

  /// Blocks until the matching message is delivered; returns its payload.
  /// Under a cost model, advances the rank clock to max(now, arrival).
  std::vector<std::byte> wait();

 private:
  friend class Comm;
  detail::Mailbox* box_ = nullptr;
  std::shared_ptr<detail::RecvState> state_;
  Clock* clock_ = nullptr;
  double timeout_s_ = 30.0;
  // User-tag waits time out as TagMismatchTimeout; stuck collectives as
  // Deadlock.
  ErrorCode timeout_code_ = ErrorCode::TagMismatchTimeout;
  std::string what_;
};

class PendingSend {
 public:
  PendingSend() = default;
  explicit PendingSend(double egress_complete)
      : egress_complete_(egress_complete) {}

  void wait() const {}  // sends are eager; completion is immediate

  /// Virtual time at which the payload has left this rank (staging buffers
  /// feeding the send become reusable then). Zero without a cost model.
  double egress_complete_vtime() const { return egress_complete_; }

 private:
  double egress_complete_ = 0.0;
};

/// One rank's handle onto a communicator: point-to-point async messaging
/// with exactly-once, per-(source,tag) FIFO delivery. A handle is owned by
/// exactly one rank worker.
class Comm {
 public:
  virtual ~Comm() = default;

  int rank() const { return rank_; }
  int size() const { return static_cast<int>(members_.size()); }
  std::uint32_t group() const { return group_; }
  Clock* clock() const { return clock_; }
  double deadlock_timeout_s() const { return timeout_s_; }

  /// World rank backing a group rank.
  int world_rank_of(int member) const { return members_[member]; }

  PendingSend isend(int dest, int tag, std::vector<std::byte> payload);
  PendingRecv irecv(int source, int tag);

  /// Collective bookkeeping: one internal tag per collective call, advanced
  /// identically on every member.
  int next_collective_tag() {
    const int tag = kInternalTagBase + (collective_seq_ & 0x7FFF);
    ++collective_seq_;
    return tag;
  }

  /// Backend hook: new communicator over a subset of this world's ranks.
  virtual std::unique_ptr<Comm> make_subgroup(std::vector<int> world_members,
                                              int my_rank,
                                              std::uint32_t group_id) = 0;

  /// Backend hook: fresh group id unique within this world. Called on the
  /// split leader only; the id is distributed with the membership message.
  virtual std::uint32_t allocate_group_id() = 0;

 protected:
  Comm(std::vector<int> members, int rank, std::uint32_t group, Clock* clock,
       double timeout_s)
      : members_(std::move(members)),
        rank_(rank),
        group_(group),
        clock_(clock),
        timeout_s_(timeout_s) {}

  virtual void send_to_world_rank(int world_dest, detail::MatchKey key,
                                  std::vector<std::byte> payload,
                                  double arrival_vtime) = 0;
  virtual detail::Mailbox& my_mailbox() = 0;

  void check_peer(int peer) const {
    if (peer < 0 || peer >= size()) {
      raise(ErrorCode::InvalidRank, "peer rank out of range");
    }
  }

  std::vector<int> members_;  // group rank -> world rank
  int rank_ = 0;
  std::uint32_t group_ = 0;
  Clock* clock_ = nullptr;
  double timeout_s_ = 30.0;
  std::uint32_t collective_seq_ = 0;
};

/// Elapsed virtual seconds on this rank (0 without a cost model).
inline double simulated_clock(const Comm& comm) {
  return comm.clock() != nullptr ? comm.clock()->now() : 0.0;
}

/// All members send to rank 0 and wait for its ack.
void barrier(Comm& comm);

/// Members sharing a color form a new communicator, ranked by (key, rank).
std::unique_ptr<Comm> split(Comm& comm, int color, int key);

/// Convenience collectives used by tensor gather/scatter and the bench.
std::vector<std::vector<std::byte>> gather_bytes(Comm& comm,
                                                 std::vector<std::byte> mine,
                                                 int root = 0);
std::vector<std::byte> scatter_bytes(Comm& comm,
                                     std::vector<std::vector<std::byte>> parts,
                                     int root = 0);
std::vector<std::byte> broadcast_bytes(Comm& comm, std::vector<std::byte> data,
                                       int root = 0);

struct WorldOptions {
  std::optional<CostModel> cost_model;
  double deadlock_timeout_s = 30.0;
};

namespace detail {

/// Runs `body` once per rank on its own thread; rethrows the first worker
/// failure as WorkerPanic after cancelling the rest.
void run_in_process_world(int p, const WorldOptions& options,
                          const std::function<void(Comm&)>& body);

}  // namespace detail

/// In-process world: p rank workers over an in-memory message fabric.
/// Deterministic results for deterministic bodies.
template <class F>
auto spawn_world(int p, F body, WorldOptions options = {}) {
  if (p < 1) raise(ErrorCode::InvalidRank, "world size must be >= 1");
  using R = std::invoke_result_t<F&, Comm&>;
  if constexpr (std::is_void_v<R>) {
    detail::run_in_process_world(p, options,
                                 [&body](Comm& comm) { body(comm); });
  } else {
    std::vector<R> results(p);
    detail::run_in_process_world(p, options, [&body, &results](Comm& comm) {
      results[comm.rank()] = body(comm);
    });
    return results;
  }
}

}  // namespace dfft::transport
