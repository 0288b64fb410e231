// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "dfft/transport.hpp"

#include <algorithm>
#include <map>
#include <thread>

#include "dfft/bytes.hpp"
#include "mailbox_internal.hpp"

namespace dfft::transport {
namespace detail {

class InProcWorld {
 public:
  InProcWorld(int p, const WorldOptions& options) : options_(options) {
    boxes_.reserve(p);
    for (int r = 0; r < p; ++r) {
      boxes_.push_back(std::make_unique<Mailbox>(&abort_));
    }
    if (options.cost_model) {
      for (int r = 0; r < p; ++r) {
        clocks_.push_back(std::make_unique<Clock>(*options.cost_model));
      }
    }
    group_counters_.assign(p, 0);
  }

  Mailbox& box(int world_rank) { return *boxes_[world_rank]; }
  Clock* clock(int world_rank) {
    return clocks_.empty() ? nullptr : clocks_[world_rank].get();
  }
  double timeout() const { return options_.deadlock_timeout_s; }

  std::uint32_t allocate_group_id(int world_rank) {
    return scoped_group_id(world_rank, group_counters_[world_rank]);
  }

  void abort(int rank, const std::string& what) {
    abort_.trip(rank, what);
    for (auto& box : boxes_) box->interrupt();
  }

  bool aborted() const { return abort_.flag.load(); }
  std::pair<int, std::string> abort_info() { return abort_.info(); }

 private:
  WorldOptions options_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  std::vector<std::unique_ptr<Clock>> clocks_;
  std::vector<std::uint16_t> group_counters_;  // touched only by the owner thread
  AbortState abort_;
};

class InProcComm : public Comm {
 public:
  InProcComm(InProcWorld* world, std::vector<int> members, int rank,
             std::uint32_t group)
      : Comm(std::move(members), rank, group, nullptr, world->timeout()),
        world_(world) {
    clock_ = world->clock(world_rank_of(this->rank()));
  }

  std::unique_ptr<Comm> make_subgroup(std::vector<int> world_members,
                                      int my_rank,
                                      std::uint32_t group_id) override {
    return std::make_unique<InProcComm>(world_, std::move(world_members),
                                        my_rank, group_id);
  }

  std::uint32_t allocate_group_id() override {
    return world_->allocate_group_id(world_rank_of(rank()));
  }

 protected:
  void send_to_world_rank(int world_dest, MatchKey key,
                          std::vector<std::byte> payload,
                          double arrival_vtime) override {
    world_->box(world_dest).deliver(
        key, Envelope{std::move(payload), arrival_vtime});
  }

  Mailbox& my_mailbox() override { return world_->box(world_rank_of(rank())); }

 private:
  InProcWorld* world_;
};

void run_in_process_world(int p, const WorldOptions& options,
                          const std::function<void(Comm&)>& body) {
  InProcWorld world(p, options);
  std::vector<int> all(p);
  for (int r = 0; r < p; ++r) all[r] = r;

  std::vector<std::thread> workers;
  workers.reserve(p);
  for (int rank = 0; rank < p; ++rank) {
    workers.emplace_back([&world, &body, all, rank] {
      InProcComm comm(&world, all, rank, 0);
      try {
        body(comm);
      } catch (const AbortSignal&) {
      } catch (const std::exception& e) {
        world.abort(rank, e.what());
      } catch (...) {
        world.abort(rank, "unknown exception");
      }
    });
  }
  for (auto& w : workers) w.join();
  if (world.aborted()) {
    auto [rank, what] = world.abort_info();
    raise(ErrorCode::WorkerPanic,
          "rank " + std::to_string(rank) + " failed: " + what);
  }
}

}  // namespace detail

std::vector<std::byte> PendingRecv::wait() {
  if (box_ == nullptr) raise(ErrorCode::InvalidRank, "wait on an empty handle");
  return box_->wait(state_, timeout_s_, clock_, timeout_code_, what_);
}

PendingSend Comm::isend(int dest, int tag, std::vector<std::byte> payload) {
  check_peer(dest);
  if (tag < 0 || tag > 0xFFFF) {
    raise(ErrorCode::TagMismatchTimeout, "tag outside the 16-bit wire budget");
  }
  double arrival = 0.0;
  double egress = 0.0;
  if (clock_ != nullptr) {
    const auto [a, e] = clock_->send_departure(payload.size());
    arrival = a;
    egress = e;
  }
  detail::MatchKey key{group_, members_[rank_], tag};
  send_to_world_rank(members_[dest], key, std::move(payload), arrival);
  return PendingSend(egress);
}

PendingRecv Comm::irecv(int source, int tag) {
  check_peer(source);
  if (tag < 0 || tag > 0xFFFF) {
    raise(ErrorCode::TagMismatchTimeout, "tag outside the 16-bit wire budget");
  }
  detail::MatchKey key{group_, members_[source], tag};
  PendingRecv pr;
  pr.box_ = &my_mailbox();
  pr.state_ = pr.box_->post(key);
  pr.clock_ = clock_;
  pr.timeout_s_ = timeout_s_;
  pr.timeout_code_ = tag >= kInternalTagBase ? ErrorCode::Deadlock
                                             : ErrorCode::TagMismatchTimeout;
  pr.what_ = "group " + std::to_string(group_) + " source " +
             std::to_string(source) + " tag " + std::to_string(tag);
  return pr;
}

void barrier(Comm& comm) {
  const int tag = comm.next_collective_tag();
  if (comm.rank() == 0) {
    std::vector<PendingRecv> pending;
    pending.reserve(comm.size() - 1);
    for (int r = 1; r < comm.size(); ++r) pending.push_back(comm.irecv(r, tag));
    for (auto& pr : pending) pr.wait();
    for (int r = 1; r < comm.size(); ++r) comm.isend(r, tag, {});
  } else {
    auto ack = comm.irecv(0, tag);
    comm.isend(0, tag, {});
    ack.wait();
  }
}

std::unique_ptr<Comm> split(Comm& comm, int color, int key) {
  const int tag = comm.next_collective_tag();
  std::vector<std::byte> request;
  bytes::append_u32(request, static_cast<std::uint32_t>(color));
  bytes::append_u32(request, static_cast<std::uint32_t>(key));

  std::vector<std::byte> assignment;
  if (comm.rank() == 0) {
    std::vector<std::pair<int, int>> entries(comm.size());  // (color, key)
    entries[0] = {color, key};
    std::vector<PendingRecv> pending;
    pending.reserve(comm.size() - 1);
    for (int r = 1; r < comm.size(); ++r) pending.push_back(comm.irecv(r, tag));
    for (int r = 1; r < comm.size(); ++r) {
      auto raw = pending[r - 1].wait();
      entries[r] = {static_cast<int>(bytes::read_u32(raw, 0)),
                    static_cast<int>(bytes::read_u32(raw, 4))};
    }

    std::map<int, std::vector<std::pair<int, int>>> groups;  // color -> (key, rank)
    for (int r = 0; r < comm.size(); ++r) {
      groups[entries[r].first].push_back({entries[r].second, r});
    }
    for (auto& [color_value, members] : groups) {
      (void)color_value;
      std::sort(members.begin(), members.end());
      const std::uint32_t group_id = comm.allocate_group_id();
      for (int new_rank = 0; new_rank < static_cast<int>(members.size());
           ++new_rank) {
        std::vector<std::byte> msg;
        bytes::append_u32(msg, group_id);
        bytes::append_u32(msg, static_cast<std::uint32_t>(new_rank));
        bytes::append_u32(msg, static_cast<std::uint32_t>(members.size()));
        for (const auto& [member_key, parent_rank] : members) {
          (void)member_key;
          bytes::append_u32(msg, static_cast<std::uint32_t>(
                                     comm.world_rank_of(parent_rank)));
        }
        const int dest = members[new_rank].second;
        if (dest == 0) {
          assignment = std::move(msg);
        } else {
          comm.isend(dest, tag, std::move(msg));
        }
      }
    }
  } else {
    auto reply = comm.irecv(0, tag);
    comm.isend(0, tag, std::move(request));
    assignment = reply.wait();
  }

  const std::uint32_t group_id = bytes::read_u32(assignment, 0);
  const int my_rank = static_cast<int>(bytes::read_u32(assignment, 4));
  const int group_size = static_cast<int>(bytes::read_u32(assignment, 8));
  std::vector<int> world_members(group_size);
  for (int r = 0; r < group_size; ++r) {
    world_members[r] =
        static_cast<int>(bytes::read_u32(assignment, 12 + 4 * r));
  }
  return comm.make_subgroup(std::move(world_members), my_rank, group_id);
}

std::vector<std::vector<std::byte>> gather_bytes(Comm& comm,
                                                 std::vector<std::byte> mine,
                                                 int root) {
  const int tag = comm.next_collective_tag();
  std::vector<std::vector<std::byte>> out;
  if (comm.rank() == root) {
    out.resize(comm.size());
    std::vector<std::pair<int, PendingRecv>> pending;
    for (int r = 0; r < comm.size(); ++r) {
      if (r != root) pending.emplace_back(r, comm.irecv(r, tag));
    }
    out[root] = std::move(mine);
    for (auto& [r, pr] : pending) out[r] = pr.wait();
  } else {
    comm.isend(root, tag, std::move(mine));
  }
  return out;
}

std::vector<std::byte> scatter_bytes(Comm& comm,
                                     std::vector<std::vector<std::byte>> parts,
                                     int root) {
  const int tag = comm.next_collective_tag();
  if (comm.rank() == root) {
    if (static_cast<int>(parts.size()) != comm.size()) {
      raise(ErrorCode::CountMismatch, "scatter needs one part per rank");
    }
    for (int r = 0; r < comm.size(); ++r) {
      if (r != root) comm.isend(r, tag, std::move(parts[r]));
    }
    return std::move(parts[root]);
  }
  return comm.irecv(root, tag).wait();
}

std::vector<std::byte> broadcast_bytes(Comm& comm, std::vector<std::byte> data,
                                       int root) {
  const int tag = comm.next_collective_tag();
  if (comm.rank() == root) {
    for (int r = 0; r < comm.size(); ++r) {
      if (r != root) comm.isend(r, tag, data);
    }
    return data;
  }
  return comm.irecv(root, tag).wait();
}

}  // namespace dfft::transport
