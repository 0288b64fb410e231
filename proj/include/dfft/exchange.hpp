// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstring>
#include <numeric>
#include <span>
#include <vector>

#include "dfft/dist_tensor.hpp"
#include "dfft/layout.hpp"
#include "dfft/timing.hpp"
#include "dfft/transport.hpp"

namespace dfft {

enum class ScatterDim { Rows, Cols };
enum class GatherDim { Rows, Cols };

/// Local view driving one side of a transpose: [batch][rows][cols][super]
/// with `super` contiguous elements as the innermost unit. For pack, the
/// blocks split the scattered dim into per-destination sections; for unpack
/// they describe the per-source pieces of the gathered dim.
struct TransposeSpec {
  std::int64_t batch = 1;
  std::int64_t rows = 1;
  std::int64_t cols = 1;
  std::int64_t super = 1;
  BlockMap blocks;
  ScatterDim scatter = ScatterDim::Cols;
  GatherDim gather = GatherDim::Cols;
  // Pack sections ordered [block][rows][super] instead of [rows][block][super]
  // (the final forward exchange); requires batch == 1 and scatter == Cols.
  bool transposed_sections = false;

  std::int64_t view_count() const { return batch * rows * cols * super; }
};

/// Reorders the local block so each destination's section is contiguous,
/// sections in destination-rank order.
template <class E>
std::vector<E> pack(std::span<const E> in, const TransposeSpec& spec) {
  if (static_cast<std::int64_t>(in.size()) != spec.view_count()) {
    raise(ErrorCode::CountMismatch, "pack input does not match the view");
  }
  std::vector<E> out(in.size());
  E* o = out.data();
  const int q_count = static_cast<int>(spec.blocks.counts.size());
  if (spec.transposed_sections) {
    if (spec.batch != 1 || spec.scatter != ScatterDim::Cols) {
      raise(ErrorCode::CountMismatch,
            "transposed pack requires batch==1 and column scatter");
    }
    for (int q = 0; q < q_count; ++q) {
      const std::int64_t off = spec.blocks.offsets[q];
      for (std::int64_t c = 0; c < spec.blocks.counts[q]; ++c) {
        for (std::int64_t r = 0; r < spec.rows; ++r) {
          std::memcpy(o, in.data() + (r * spec.cols + off + c) * spec.super,
                      spec.super * sizeof(E));
          o += spec.super;
        }
      }
    }
  } else if (spec.scatter == ScatterDim::Cols) {
    const std::int64_t pre = spec.batch * spec.rows;
    for (int q = 0; q < q_count; ++q) {
      const std::int64_t off = spec.blocks.offsets[q];
      const std::int64_t run = spec.blocks.counts[q] * spec.super;
      for (std::int64_t i = 0; i < pre; ++i) {
        std::memcpy(o, in.data() + (i * spec.cols + off) * spec.super,
                    run * sizeof(E));
        o += run;
      }
    }
  } else {
    for (int q = 0; q < q_count; ++q) {
      const std::int64_t off = spec.blocks.offsets[q];
      const std::int64_t run = spec.blocks.counts[q] * spec.cols * spec.super;
      for (std::int64_t b = 0; b < spec.batch; ++b) {
        std::memcpy(o, in.data() + (b * spec.rows + off) * spec.cols * spec.super,
                    run * sizeof(E));
        o += run;
      }
    }
  }
  return out;
}

/// Restores layout after the exchange: pieces arrive in source-rank order
/// and are placed at their block offsets along the gathered dim.
template <class E>
std::vector<E> unpack(std::span<const E> in, const TransposeSpec& spec) {
  std::vector<E> out(static_cast<std::size_t>(spec.view_count()));
  const E* i = in.data();
  const E* const end = in.data() + in.size();
  const int q_count = static_cast<int>(spec.blocks.counts.size());
  if (spec.gather == GatherDim::Rows) {
    if (spec.blocks.total() != spec.rows) {
      raise(ErrorCode::CountMismatch, "gather blocks must tile the rows");
    }
    for (int q = 0; q < q_count; ++q) {
      const std::int64_t off = spec.blocks.offsets[q];
      const std::int64_t run = spec.blocks.counts[q] * spec.cols * spec.super;
      for (std::int64_t b = 0; b < spec.batch; ++b) {
        if (i + run > end) raise(ErrorCode::CountMismatch, "unpack underflow");
        std::memcpy(out.data() + (b * spec.rows + off) * spec.cols * spec.super,
                    i, run * sizeof(E));
        i += run;
      }
    }
  } else {
    if (spec.blocks.total() != spec.cols) {
      raise(ErrorCode::CountMismatch, "gather blocks must tile the cols");
    }
    const std::int64_t pre = spec.batch * spec.rows;
    for (int q = 0; q < q_count; ++q) {
      const std::int64_t off = spec.blocks.offsets[q];
      const std::int64_t run = spec.blocks.counts[q] * spec.super;
      for (std::int64_t p = 0; p < pre; ++p) {
        if (i + run > end) raise(ErrorCode::CountMismatch, "unpack underflow");
        std::memcpy(out.data() + (p * spec.cols + off) * spec.super, i,
                    run * sizeof(E));
        i += run;
      }
    }
  }
  if (i != end) raise(ErrorCode::CountMismatch, "unpack leftover bytes");
  return out;
}

/// Out-of-place super-element transpose:
/// out[(c*rows + r)*s + k] = in[(r*cols + c)*s + k].
template <class E>
std::vector<E> local_transpose(std::span<const E> in, std::int64_t rows,
                               std::int64_t cols, std::int64_t super) {
  if (static_cast<std::int64_t>(in.size()) != rows * cols * super) {
    raise(ErrorCode::LengthMismatch, "local_transpose size mismatch");
  }
  std::vector<E> out(in.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      std::memcpy(out.data() + (c * rows + r) * super,
                  in.data() + (r * cols + c) * super, super * sizeof(E));
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::int64_t> prefix_offsets(
    const std::vector<std::int64_t>& counts) {
  std::vector<std::int64_t> offsets(counts.size(), 0);
  for (std::size_t i = 1; i < counts.size(); ++i) {
    offsets[i] = offsets[i - 1] + counts[i - 1];
  }
  return offsets;
}

}  // namespace detail

/// Blocking all-to-all over pre-posted receives: section j of rank i's send
/// buffer arrives as section i of rank j's receive buffer. Counts are in
/// elements; empty sections move no message.
template <class E>
std::vector<E> all_to_all(transport::Comm& comm, std::span<const E> send,
                          const std::vector<std::int64_t>& send_counts,
                          const std::vector<std::int64_t>& recv_counts,
                          TimingBreakdown* timers = nullptr) {
  const int p = comm.size();
  if (static_cast<int>(send_counts.size()) != p ||
      static_cast<int>(recv_counts.size()) != p) {
    raise(ErrorCode::CountMismatch, "one count per rank required");
  }
  const auto send_off = detail::prefix_offsets(send_counts);
  const auto recv_off = detail::prefix_offsets(recv_counts);
  if (send_off.back() + send_counts.back() !=
      static_cast<std::int64_t>(send.size())) {
    raise(ErrorCode::CountMismatch, "send counts do not cover the buffer");
  }
  std::vector<E> out(recv_off.back() + recv_counts.back());

  const int tag = comm.next_collective_tag();
  const int me = comm.rank();
  std::vector<transport::PendingRecv> pending(p);
  for (int j = 1; j < p; ++j) {
    const int peer = (me + j) % p;
    if (recv_counts[peer] > 0) pending[peer] = comm.irecv(peer, tag);
  }
  if (send_counts[me] != recv_counts[me]) {
    raise(ErrorCode::CountMismatch, "self section counts disagree");
  }
  if (send_counts[me] > 0) {
    std::memcpy(out.data() + recv_off[me], send.data() + send_off[me],
                send_counts[me] * sizeof(E));
  }
  for (int j = 1; j < p; ++j) {
    const int peer = (me + j) % p;
    if (send_counts[peer] == 0) continue;
    comm.isend(peer, tag,
               bytes::from_values(std::span<const E>(
                   send.data() + send_off[peer],
                   static_cast<std::size_t>(send_counts[peer]))));
  }
  for (int j = 1; j < p; ++j) {
    const int peer = (me + j) % p;
    if (recv_counts[peer] == 0) continue;
    const double t0 = timing::mark(comm.clock());
    auto payload = pending[peer].wait();
    if (timers != nullptr) {
      timers->wire_comm += timing::since(comm.clock(), t0);
    }
    if (payload.size() !=
        static_cast<std::size_t>(recv_counts[peer]) * sizeof(E)) {
      raise(ErrorCode::CountMismatch, "received section has the wrong size");
    }
    std::memcpy(out.data() + recv_off[peer], payload.data(), payload.size());
  }
  return out;
}

/// Stage-all-then-exchange baseline: the whole send image crosses the
/// staging hop, then a blocking exchange, then the whole receive image
/// crosses back. The comparison target for the pipelined path.
template <class E>
std::vector<E> staged_all_to_all(transport::Comm& comm, std::span<const E> send,
                                 const std::vector<std::int64_t>& send_counts,
                                 const std::vector<std::int64_t>& recv_counts,
                                 TimingBreakdown* timers = nullptr) {
  transport::Clock* clock = comm.clock();
  double t0 = timing::mark(clock);
  std::vector<E> staged(send.begin(), send.end());
  if (clock != nullptr) clock->add_staging_copy(staged.size() * sizeof(E));
  if (timers != nullptr) timers->staging_copy += timing::since(clock, t0);

  auto wired = all_to_all(comm, std::span<const E>(staged), send_counts,
                          recv_counts, timers);

  t0 = timing::mark(clock);
  std::vector<E> out(wired.begin(), wired.end());
  if (clock != nullptr) clock->add_staging_copy(out.size() * sizeof(E));
  if (timers != nullptr) timers->staging_copy += timing::since(clock, t0);
  return out;
}

/// Chunk ordering and staging discipline of the pipelined exchange. Rotating
/// pairing by default: rank i reaches peer (i + j) mod P at step j.
struct ExchangeSchedule {
  std::vector<int> peer_order;  // every peer except self, exactly once
  int chunks_per_peer = 1;
};

inline ExchangeSchedule rotation_schedule(int rank, int size,
                                          int chunks_per_peer = 1) {
  ExchangeSchedule schedule;
  schedule.chunks_per_peer = chunks_per_peer;
  for (int j = 1; j < size; ++j) {
    schedule.peer_order.push_back((rank + j) % size);
  }
  return schedule;
}

inline void validate_schedule(const ExchangeSchedule& schedule, int rank,
                              int size) {
  if (schedule.chunks_per_peer < 1) {
    raise(ErrorCode::ConfigInvalid, "chunks per peer must be >= 1");
  }
  std::vector<bool> seen(size, false);
  for (int peer : schedule.peer_order) {
    if (peer < 0 || peer >= size || peer == rank || seen[peer]) {
      raise(ErrorCode::CountMismatch,
            "schedule must list every peer exactly once");
    }
    seen[peer] = true;
  }
  for (int r = 0; r < size; ++r) {
    if (r != rank && !seen[r]) {
      raise(ErrorCode::CountMismatch,
            "schedule must list every peer exactly once");
    }
  }
}

/// Bounded pool of staging-buffer slots. The payload allocation plays the
/// physical buffer; the arena tracks slot availability so stage-ins wait
/// (in virtual time) for the send that last used the slot to clear the
/// egress link. Rank-private.
class StagingArena {
 public:
  StagingArena(std::size_t buffer_bytes, int buffers)
      : buffer_bytes_(buffer_bytes), free_at_(buffers, 0.0) {}

  int buffer_count() const { return static_cast<int>(free_at_.size()); }
  std::size_t buffer_bytes() const { return buffer_bytes_; }

  /// Earliest-free slot; under a cost model the caller's clock waits for it.
  /// Returns the idle seconds spent waiting.
  int acquire(transport::Clock* clock, double* waited) {
    int slot = 0;
    for (int s = 1; s < buffer_count(); ++s) {
      if (free_at_[s] < free_at_[slot]) slot = s;
    }
    *waited = clock != nullptr ? clock->advance_to(free_at_[slot]) : 0.0;
    return slot;
  }

  void release(int slot, double busy_until) { free_at_[slot] = busy_until; }

  void reset() { std::fill(free_at_.begin(), free_at_.end(), 0.0); }

 private:
  std::size_t buffer_bytes_;
  std::vector<double> free_at_;
};

/// Chunked all-to-all interleaving staging copies with sends/receives.
/// Byte-identical result to all_to_all; receives are pre-posted, each chunk
/// is staged in and sent immediately, the self chunk is copied directly
/// (bypassing arena and wire, metered as one fused staging copy), and every
/// received chunk is staged out as soon as its wait completes.
template <class E>
std::vector<E> pipelined_all_to_all(transport::Comm& comm,
                                    std::span<const E> send,
                                    const std::vector<std::int64_t>& send_counts,
                                    const std::vector<std::int64_t>& recv_counts,
                                    StagingArena& arena,
                                    const ExchangeSchedule& schedule,
                                    TimingBreakdown* timers = nullptr) {
  const int p = comm.size();
  if (arena.buffer_count() < 2) {
    raise(ErrorCode::ArenaExhausted,
          "pipelined exchange needs at least two staging buffers");
  }
  validate_schedule(schedule, comm.rank(), p);
  if (static_cast<int>(send_counts.size()) != p ||
      static_cast<int>(recv_counts.size()) != p) {
    raise(ErrorCode::CountMismatch, "one count per rank required");
  }
  const auto send_off = detail::prefix_offsets(send_counts);
  const auto recv_off = detail::prefix_offsets(recv_counts);
  if (send_off.back() + send_counts.back() !=
      static_cast<std::int64_t>(send.size())) {
    raise(ErrorCode::CountMismatch, "send counts do not cover the buffer");
  }
  const int me = comm.rank();
  if (send_counts[me] != recv_counts[me]) {
    raise(ErrorCode::CountMismatch, "self section counts disagree");
  }
  std::vector<E> out(recv_off.back() + recv_counts.back());
  transport::Clock* clock = comm.clock();
  const int chunks = schedule.chunks_per_peer;

  // Sub-chunk c of a section of n elements: the ceil split both sides agree
  // on; empty sub-chunks move nothing.
  const auto chunk_range = [chunks](std::int64_t n, int c) {
    const std::int64_t step = (n + chunks - 1) / chunks;
    const std::int64_t lo = std::min<std::int64_t>(c * step, n);
    const std::int64_t hi = std::min<std::int64_t>(lo + step, n);
    return std::pair<std::int64_t, std::int64_t>(lo, hi);
  };

  const int tag = comm.next_collective_tag();
  std::vector<std::vector<transport::PendingRecv>> pending(p);
  for (int peer : schedule.peer_order) {
    for (int c = 0; c < chunks; ++c) {
      const auto [lo, hi] = chunk_range(recv_counts[peer], c);
      if (hi > lo) pending[peer].push_back(comm.irecv(peer, tag));
    }
  }

  for (int peer : schedule.peer_order) {
    for (int c = 0; c < chunks; ++c) {
      const auto [lo, hi] = chunk_range(send_counts[peer], c);
      if (hi <= lo) continue;
      const std::size_t chunk_bytes = (hi - lo) * sizeof(E);
      if (chunk_bytes > arena.buffer_bytes()) {
        raise(ErrorCode::ConfigInvalid, "chunk exceeds the staging buffer");
      }
      double waited = 0.0;
      const int slot = arena.acquire(clock, &waited);
      if (timers != nullptr) timers->wire_comm += waited;

      const double t0 = timing::mark(clock);
      auto payload = bytes::from_values(std::span<const E>(
          send.data() + send_off[peer] + lo, static_cast<std::size_t>(hi - lo)));
      if (clock != nullptr) clock->add_staging_copy(chunk_bytes);
      if (timers != nullptr) timers->staging_copy += timing::since(clock, t0);

      auto ps = comm.isend(peer, tag, std::move(payload));
      arena.release(slot, ps.egress_complete_vtime());
    }
  }

  if (send_counts[me] > 0) {
    const double t0 = timing::mark(clock);
    std::memcpy(out.data() + recv_off[me], send.data() + send_off[me],
                send_counts[me] * sizeof(E));
    if (clock != nullptr) clock->add_staging_copy(send_counts[me] * sizeof(E));
    if (timers != nullptr) timers->staging_copy += timing::since(clock, t0);
  }

  for (int peer : schedule.peer_order) {
    std::size_t at = 0;
    for (int c = 0; c < chunks; ++c) {
      const auto [lo, hi] = chunk_range(recv_counts[peer], c);
      if (hi <= lo) continue;
      double t0 = timing::mark(clock);
      auto payload = pending[peer][at++].wait();
      if (timers != nullptr) timers->wire_comm += timing::since(clock, t0);
      if (payload.size() != static_cast<std::size_t>(hi - lo) * sizeof(E)) {
        raise(ErrorCode::CountMismatch, "received chunk has the wrong size");
      }
      t0 = timing::mark(clock);
      std::memcpy(out.data() + recv_off[peer] + lo, payload.data(),
                  payload.size());
      if (clock != nullptr) clock->add_staging_copy(payload.size());
      if (timers != nullptr) timers->staging_copy += timing::since(clock, t0);
    }
  }
  return out;
}

enum class ExchangePath { Blocking, Staged, Pipelined };

/// Everything one rank needs to run one layout transition.
struct TransposeStepSpec {
  int grid_axis = 0;
  int gather_axis = 0;   // u: decomposed in `from`, local in `to`
  int scatter_axis = 0;  // v: local in `from`, decomposed in `to`
  TransposeSpec pack_spec;
  TransposeSpec unpack_spec;
  std::vector<std::int64_t> send_counts, recv_counts;
  // Final forward exchange: unpack yields [my v-block][U][super]; a local
  // transpose restores xyz order.
  bool needs_fixup = false;
  std::int64_t fix_rows = 0, fix_cols = 0, fix_super = 0;
};

/// Derives the per-rank step for a transition that redistributes exactly one
/// axis pair over one grid axis.
inline TransposeStepSpec make_transpose_step(const Distribution& from,
                                             const Distribution& to, int rank,
                                             bool transposed_final) {
  if (from.dims != to.dims || from.grid != to.grid ||
      from.element != to.element) {
    raise(ErrorCode::IncompatibleLayouts,
          "transpose endpoints must share dims, grid and element kind");
  }
  int g = -1;
  for (std::size_t a = 0; a < from.axis_of_grid.size(); ++a) {
    if (from.axis_of_grid[a] != to.axis_of_grid[a]) {
      if (g != -1) {
        raise(ErrorCode::IncompatibleLayouts,
              "exactly one grid axis may move per transpose");
      }
      g = static_cast<int>(a);
    }
  }
  if (g == -1) {
    raise(ErrorCode::IncompatibleLayouts, "layouts are identical");
  }

  TransposeStepSpec step;
  step.grid_axis = g;
  step.gather_axis = from.axis_of_grid[g];
  step.scatter_axis = to.axis_of_grid[g];
  const int u = step.gather_axis;
  const int v = step.scatter_axis;
  const int q_count = from.grid.shape[g];
  const std::size_t nd = from.dims.ndim();

  const LocalExtents from_ext = from.extents_of(rank);
  const LocalExtents to_ext = to.extents_of(rank);

  auto product = [&](const LocalExtents& ext, std::size_t lo, std::size_t hi) {
    std::int64_t p = 1;
    for (std::size_t a = lo; a < hi; ++a) p *= ext.axes[a].length;
    return p;
  };

  const BlockMap send_blocks = block_map(from.dims[v], q_count);
  const BlockMap recv_blocks = block_map(from.dims[u], q_count);

  if (transposed_final) {
    if (u != 0 || v != 1) {
      raise(ErrorCode::IncompatibleLayouts,
            "transposed pack applies to the axis-0 gather only");
    }
    step.pack_spec = TransposeSpec{1,
                                   from_ext.axes[0].length,
                                   from_ext.axes[1].length,
                                   product(from_ext, 2, nd),
                                   send_blocks,
                                   ScatterDim::Cols,
                                   GatherDim::Cols,
                                   true};
    // pieces land in [my v-block][U][super]; fixed up afterwards
    step.unpack_spec = TransposeSpec{1,
                                     to_ext.axes[1].length,
                                     to_ext.axes[0].length,
                                     product(to_ext, 2, nd),
                                     recv_blocks,
                                     ScatterDim::Cols,
                                     GatherDim::Cols,
                                     false};
    step.needs_fixup = true;
    step.fix_rows = to_ext.axes[1].length;
    step.fix_cols = to_ext.axes[0].length;
    step.fix_super = product(to_ext, 2, nd);
  } else {
    step.pack_spec = TransposeSpec{product(from_ext, 0, v),
                                   1,
                                   from_ext.axes[v].length,
                                   product(from_ext, v + 1, nd),
                                   send_blocks,
                                   ScatterDim::Cols,
                                   GatherDim::Cols,
                                   false};
    step.unpack_spec = TransposeSpec{product(to_ext, 0, u),
                                     1,
                                     to_ext.axes[u].length,
                                     product(to_ext, u + 1, nd),
                                     recv_blocks,
                                     ScatterDim::Cols,
                                     GatherDim::Cols,
                                     false};
  }

  step.send_counts.resize(q_count);
  step.recv_counts.resize(q_count);
  const std::int64_t send_unit =
      step.pack_spec.batch * step.pack_spec.rows * step.pack_spec.super;
  const std::int64_t recv_unit =
      step.unpack_spec.batch * step.unpack_spec.rows * step.unpack_spec.super;
  for (int q = 0; q < q_count; ++q) {
    step.send_counts[q] = send_unit * send_blocks.counts[q];
    step.recv_counts[q] = recv_unit * recv_blocks.counts[q];
  }
  return step;
}

/// pack -> all-to-all -> unpack on raw element buffers. Returns the unpacked
/// buffer (pre-fixup when the step says so). Pack/unpack host copies are
/// metered at the cost model's memcpy rate.
template <class E>
std::vector<E> run_transpose_step(transport::Comm& axis_comm,
                                  std::span<const E> local,
                                  const TransposeStepSpec& step,
                                  ExchangePath path, StagingArena* arena,
                                  TimingBreakdown* timers = nullptr,
                                  int chunks_per_peer = 1) {
  transport::Clock* clock = axis_comm.clock();
  double t0 = timing::mark(clock);
  auto packed = pack(local, step.pack_spec);
  if (clock != nullptr) clock->add_host_copy(packed.size() * sizeof(E));
  if (timers != nullptr) timers->pack += timing::since(clock, t0);

  std::vector<E> received;
  switch (path) {
    case ExchangePath::Blocking:
      received = all_to_all(axis_comm, std::span<const E>(packed),
                            step.send_counts, step.recv_counts, timers);
      break;
    case ExchangePath::Staged:
      received = staged_all_to_all(axis_comm, std::span<const E>(packed),
                                   step.send_counts, step.recv_counts, timers);
      break;
    case ExchangePath::Pipelined: {
      if (arena == nullptr) {
        raise(ErrorCode::ArenaExhausted, "pipelined exchange needs an arena");
      }
      const auto schedule = rotation_schedule(axis_comm.rank(),
                                              axis_comm.size(),
                                              std::max(1, chunks_per_peer));
      received =
          pipelined_all_to_all(axis_comm, std::span<const E>(packed),
                               step.send_counts, step.recv_counts, *arena,
                               schedule, timers);
      break;
    }
  }

  t0 = timing::mark(clock);
  auto out = unpack(std::span<const E>(received), step.unpack_spec);
  if (clock != nullptr) clock->add_host_copy(out.size() * sizeof(E));
  if (timers != nullptr) timers->unpack += timing::since(clock, t0);
  return out;
}

/// Splits the world communicator into the sub-communicator that varies grid
/// axis g and keeps every other coordinate fixed.
inline std::unique_ptr<transport::Comm> split_grid_axis(
    transport::Comm& world, const ProcessGrid& grid, int g) {
  const auto coords = grid.coords_of(world.rank());
  int color = 0;
  for (std::size_t a = 0; a < grid.ndim(); ++a) {
    if (static_cast<int>(a) == g) continue;
    color = color * grid.shape[a] + coords[a];
  }
  return transport::split(world, color, coords[g]);
}

/// The [OP]-level transpose: moves a DistTensor between two layouts that
/// differ in one redistributed axis pair, preserving global content and xyz
/// order. Collective over `world`.
template <class T>
DistTensor<T> global_transpose(transport::Comm& world, const DistTensor<T>& in,
                               const Distribution& to, bool pipelined,
                               TimingBreakdown* timers = nullptr) {
  const auto step = make_transpose_step(in.dist, to, in.rank, false);
  auto axis_comm = split_grid_axis(world, in.dist.grid, step.grid_axis);
  DistTensor<T> out;
  out.dist = to;
  out.rank = in.rank;
  const ExchangePath path =
      pipelined ? ExchangePath::Pipelined : ExchangePath::Blocking;
  std::int64_t max_chunk = 1;
  for (const auto c : step.send_counts) max_chunk = std::max(max_chunk, c);
  StagingArena arena(static_cast<std::size_t>(max_chunk) * sizeof(cx<T>), 2);
  if (in.dist.element == ElementKind::Real) {
    out.real = run_transpose_step(*axis_comm, std::span<const T>(in.real), step,
                                  path, &arena, timers);
  } else {
    out.cplx = run_transpose_step(*axis_comm, std::span<const cx<T>>(in.cplx),
                                  step, path, &arena, timers);
  }
  return out;
}

}  // namespace dfft
