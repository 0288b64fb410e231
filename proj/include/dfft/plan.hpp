// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "dfft/exchange.hpp"
#include "dfft/kernels.hpp"

namespace dfft {

enum class FftStageKind { C2C, R2C, C2R };

/// One batch of local 1-D transforms along `axis` (full-length, never
/// decomposed at its own stage).
struct LocalFftStage {
  int axis = 0;
  Direction dir = Direction::Forward;
  FftStageKind kind = FftStageKind::C2C;
  Distribution before, after;
};

/// One global redistribution over one grid axis.
struct TransposeStage {
  Distribution from, to;
  int grid_axis = 0;
  bool transposed_pack = false;  // final forward exchange packs [block][rows]
  bool pipelined = false;
};

/// Restores xyz order after the transposed final exchange.
struct LocalTransposeStage {
  Distribution dist;  // the xyz layout this stage produces
};

struct NormalizeStage {
  double factor = 1.0;
};

using Stage = std::variant<LocalFftStage, TransposeStage, LocalTransposeStage,
                           NormalizeStage>;

struct PlanOptions {
  ExchangePath exchange = ExchangePath::Blocking;
  bool normalize = true;        // backward applies 1/N once
  int chunks_per_peer = 1;      // pipelined sub-chunking
  int staging_buffers = 2;
  bool validate_finite = false; // debug: reject NaN/Inf at the plan boundary
};

/// An ordered stage list realizing one transform direction for one
/// decomposition. Immutable after construction and shareable across rank
/// workers; per-execution state lives in ExecContext and buffers.
template <class T>
struct Plan {
  Direction direction = Direction::Forward;
  TransformKind kind = TransformKind::C2C;
  GlobalDims dims;  // spatial-side dims
  ProcessGrid grid;
  PlanOptions options;
  Distribution input, output;
  std::vector<Stage> stages;
  std::vector<std::string> warnings;

  int fft_stage_count() const {
    int n = 0;
    for (const auto& s : stages) n += std::holds_alternative<LocalFftStage>(s);
    return n;
  }
  int transpose_stage_count() const {
    int n = 0;
    for (const auto& s : stages) n += std::holds_alternative<TransposeStage>(s);
    return n;
  }

  /// Stage-structure fingerprint for specialization checks.
  std::string signature() const {
    std::string sig;
    for (const auto& s : stages) {
      if (const auto* f = std::get_if<LocalFftStage>(&s)) {
        sig += "F" + std::to_string(f->axis);
      } else if (const auto* t = std::get_if<TransposeStage>(&s)) {
        sig += "T" + std::to_string(t->grid_axis) +
               (t->transposed_pack ? "x" : "");
      } else if (std::holds_alternative<LocalTransposeStage>(s)) {
        sig += "L";
      } else {
        sig += "N";
      }
      sig += ";";
    }
    return sig;
  }
};

namespace detail {

inline void check_kind_direction(TransformKind kind, Direction dir) {
  if (kind == TransformKind::R2C && dir != Direction::Forward) {
    raise(ErrorCode::ConfigInvalid, "R2C is a forward transform");
  }
  if (kind == TransformKind::C2R && dir != Direction::Backward) {
    raise(ErrorCode::ConfigInvalid, "C2R is a backward transform");
  }
}

/// A grid factor larger than both axes it ever decomposes leaves its tail
/// ranks permanently empty; reject the grid.
inline void check_rank_occupancy(const GlobalDims& dims,
                                 const ProcessGrid& grid,
                                 TransformKind kind) {
  const GlobalDims hatted = hat_dims(
      dims, kind == TransformKind::C2R ? TransformKind::R2C : kind);
  for (std::size_t g = 0; g < grid.ndim(); ++g) {
    const std::int64_t spatial_axis = dims[g];
    const std::int64_t freq_axis = hatted[g + 1];
    if (grid.shape[g] > spatial_axis && grid.shape[g] > freq_axis) {
      raise(ErrorCode::RankTooLow,
            "grid factor " + std::to_string(grid.shape[g]) +
                " exceeds both axes it decomposes");
    }
  }
}

template <class T>
void warm_kernel_caches(const Plan<T>& plan) {
  for (const auto& s : plan.stages) {
    if (const auto* f = std::get_if<LocalFftStage>(&s)) {
      const std::int64_t n = f->kind == FftStageKind::C2R
                                 ? f->after.dims[f->axis]
                                 : f->before.dims[f->axis];
      (void)Kernel1d<T>(static_cast<std::size_t>(n), f->dir);
      if (f->kind != FftStageKind::C2C) {
        (void)Kernel1d<T>(static_cast<std::size_t>(n), f->dir);
      }
    }
  }
}

/// Shared assembly for the pencil/general family (Algorithm-2 shape):
/// forward walks axes d..0 with a transpose after each of axes d..1;
/// backward mirrors. Batch extents follow from the layout-conservation
/// invariant (the product of local extents is preserved across each stage).
template <class T>
Plan<T> build_nd_plan(const GlobalDims& dims, const ProcessGrid& grid,
                      TransformKind kind, Direction dir,
                      const PlanOptions& options) {
  check_kind_direction(kind, dir);
  check_rank_occupancy(dims, grid, kind);

  Plan<T> plan;
  plan.direction = dir;
  plan.kind = kind;
  plan.dims = dims;
  plan.grid = grid;
  plan.options = options;

  const int d = static_cast<int>(grid.ndim());
  const int last = static_cast<int>(dims.ndim()) - 1;
  const bool pipelined = options.exchange == ExchangePath::Pipelined;

  if (dir == Direction::Forward) {
    Distribution cur = spatial_layout(dims, grid, kind);
    plan.input = cur;
    for (int i = d; i >= 1; --i) {
      Distribution after = cur;
      after.hatted[i] = true;
      FftStageKind stage_kind = FftStageKind::C2C;
      if (i == last && kind == TransformKind::R2C) {
        stage_kind = FftStageKind::R2C;
        after.dims[i] = dims[i] / 2 + 1;
        after.element = ElementKind::Complex;
      }
      plan.stages.push_back(LocalFftStage{i, dir, stage_kind, cur, after});
      cur = after;

      Distribution to = cur;
      to.axis_of_grid[i - 1] = i;
      const bool mode_b = (i == 1);
      plan.stages.push_back(TransposeStage{cur, to, i - 1, mode_b, pipelined});
      if (mode_b) plan.stages.push_back(LocalTransposeStage{to});
      cur = to;
    }
    Distribution after = cur;
    after.hatted[0] = true;
    plan.stages.push_back(LocalFftStage{0, dir, FftStageKind::C2C, cur, after});
    cur = after;
    plan.output = cur;
    if (!(cur == frequency_layout(dims, grid, kind))) {
      raise(ErrorCode::LayoutMismatch, "forward plan assembly is inconsistent");
    }
  } else {
    Distribution cur = frequency_layout(dims, grid, kind);
    plan.input = cur;
    Distribution after = cur;
    after.hatted[0] = false;
    plan.stages.push_back(LocalFftStage{0, dir, FftStageKind::C2C, cur, after});
    cur = after;
    for (int i = 1; i <= d; ++i) {
      Distribution to = cur;
      to.axis_of_grid[i - 1] = i - 1;
      plan.stages.push_back(TransposeStage{cur, to, i - 1, false, pipelined});
      cur = to;

      Distribution next = cur;
      next.hatted[i] = false;
      FftStageKind stage_kind = FftStageKind::C2C;
      if (i == last && kind == TransformKind::C2R) {
        stage_kind = FftStageKind::C2R;
        next.dims[i] = dims[i];
        next.element = ElementKind::Real;
      }
      plan.stages.push_back(LocalFftStage{i, dir, stage_kind, cur, next});
      cur = next;
    }
    if (options.normalize) {
      plan.stages.push_back(
          NormalizeStage{1.0 / static_cast<double>(dims.total())});
    }
    plan.output = cur;
    if (!(cur == spatial_layout(dims, grid, kind))) {
      raise(ErrorCode::LayoutMismatch, "backward plan assembly is inconsistent");
    }
  }

  if (plan.input.any_rank_empty() || plan.output.any_rank_empty()) {
    plan.warnings.push_back("some ranks own empty blocks");
  }
  warm_kernel_caches(plan);
  return plan;
}

}  // namespace detail

/// Pencil decomposition (2-D grid over the first two axes of a 3-axis
/// tensor).
template <class T>
Plan<T> plan_pencil(const GlobalDims& dims, const ProcessGrid& grid,
                    TransformKind kind, Direction dir,
                    const PlanOptions& options = {}) {
  if (dims.ndim() != 3 || grid.ndim() != 2) {
    raise(ErrorCode::GridMismatch, "pencil needs 3 tensor axes and a 2-D grid");
  }
  return detail::build_nd_plan<T>(dims, grid, kind, dir, options);
}

/// General (d-1)-dimensional decomposition of a (d+1)-axis tensor.
template <class T>
Plan<T> plan_general(const GlobalDims& dims, const ProcessGrid& grid,
                     TransformKind kind, Direction dir,
                     const PlanOptions& options = {}) {
  if (dims.ndim() < 2 || grid.ndim() != dims.ndim() - 1) {
    raise(ErrorCode::GridMismatch,
          "general decomposition needs len(grid) == len(dims) - 1");
  }
  return detail::build_nd_plan<T>(dims, grid, kind, dir, options);
}

/// Slab decomposition: 1-D grid over axis 0. All trailing axes are
/// transformed locally (the 2-D local FFT of the 3-D case is a batched pair
/// of 1-D stages), then the single exchange, then axis 0.
template <class T>
Plan<T> plan_slab(const GlobalDims& dims, int ranks, TransformKind kind,
                  Direction dir, const PlanOptions& options = {}) {
  if (dims.ndim() < 2) {
    raise(ErrorCode::GridMismatch, "slab needs at least 2 tensor axes");
  }
  if (ranks < 1) raise(ErrorCode::GridMismatch, "need at least one rank");
  if (ranks > dims[0]) {
    raise(ErrorCode::SlabTooManyRanks, "slab decomposition needs P <= N0");
  }
  detail::check_kind_direction(kind, dir);
  const ProcessGrid grid{std::vector<int>{ranks}};

  Plan<T> plan;
  plan.direction = dir;
  plan.kind = kind;
  plan.dims = dims;
  plan.grid = grid;
  plan.options = options;
  const int last = static_cast<int>(dims.ndim()) - 1;
  const bool pipelined = options.exchange == ExchangePath::Pipelined;

  if (dir == Direction::Forward) {
    Distribution cur = spatial_layout(dims, grid, kind);
    plan.input = cur;
    for (int i = last; i >= 1; --i) {
      Distribution after = cur;
      after.hatted[i] = true;
      FftStageKind stage_kind = FftStageKind::C2C;
      if (i == last && kind == TransformKind::R2C) {
        stage_kind = FftStageKind::R2C;
        after.dims[i] = dims[i] / 2 + 1;
        after.element = ElementKind::Complex;
      }
      plan.stages.push_back(LocalFftStage{i, dir, stage_kind, cur, after});
      cur = after;
    }
    Distribution to = cur;
    to.axis_of_grid[0] = 1;
    plan.stages.push_back(TransposeStage{cur, to, 0, true, pipelined});
    plan.stages.push_back(LocalTransposeStage{to});
    cur = to;
    Distribution after = cur;
    after.hatted[0] = true;
    plan.stages.push_back(LocalFftStage{0, dir, FftStageKind::C2C, cur, after});
    plan.output = after;
    if (!(after == frequency_layout(dims, grid, kind))) {
      raise(ErrorCode::LayoutMismatch, "slab plan assembly is inconsistent");
    }
  } else {
    Distribution cur = frequency_layout(dims, grid, kind);
    plan.input = cur;
    Distribution after = cur;
    after.hatted[0] = false;
    plan.stages.push_back(LocalFftStage{0, dir, FftStageKind::C2C, cur, after});
    cur = after;
    Distribution to = cur;
    to.axis_of_grid[0] = 0;
    plan.stages.push_back(TransposeStage{cur, to, 0, false, pipelined});
    cur = to;
    for (int i = 1; i <= last; ++i) {
      Distribution next = cur;
      next.hatted[i] = false;
      FftStageKind stage_kind = FftStageKind::C2C;
      if (i == last && kind == TransformKind::C2R) {
        stage_kind = FftStageKind::C2R;
        next.dims[i] = dims[i];
        next.element = ElementKind::Real;
      }
      plan.stages.push_back(LocalFftStage{i, dir, stage_kind, cur, next});
      cur = next;
    }
    if (options.normalize) {
      plan.stages.push_back(
          NormalizeStage{1.0 / static_cast<double>(dims.total())});
    }
    plan.output = cur;
    if (!(cur == spatial_layout(dims, grid, kind))) {
      raise(ErrorCode::LayoutMismatch, "slab plan assembly is inconsistent");
    }
  }

  if (plan.input.any_rank_empty() || plan.output.any_rank_empty()) {
    plan.warnings.push_back("some ranks own empty blocks");
  }
  detail::warm_kernel_caches(plan);
  return plan;
}

/// Per-execution collective state: one sub-communicator per grid axis plus
/// the staging arena. Built collectively before timing starts; a Plan plus a
/// fresh context may serve concurrent executions.
struct ExecContext {
  transport::Comm* world = nullptr;
  std::vector<std::unique_ptr<transport::Comm>> axis_comms;
  std::unique_ptr<StagingArena> arena;
};

template <class T>
ExecContext make_context(const Plan<T>& plan, transport::Comm& comm) {
  if (comm.size() != plan.grid.size()) {
    raise(ErrorCode::GridMismatch, "communicator size must match the grid");
  }
  ExecContext ctx;
  ctx.world = &comm;
  for (int g = 0; g < static_cast<int>(plan.grid.ndim()); ++g) {
    ctx.axis_comms.push_back(split_grid_axis(comm, plan.grid, g));
  }
  std::int64_t max_chunk = 1;
  for (const auto& s : plan.stages) {
    if (const auto* t = std::get_if<TransposeStage>(&s)) {
      const auto step = make_transpose_step(t->from, t->to, comm.rank(),
                                            t->transposed_pack);
      for (const auto c : step.send_counts) {
        const int chunks = std::max(1, plan.options.chunks_per_peer);
        max_chunk = std::max(max_chunk, (c + chunks - 1) / chunks);
      }
    }
  }
  ctx.arena = std::make_unique<StagingArena>(
      static_cast<std::size_t>(max_chunk) * sizeof(cx<T>),
      std::max(1, plan.options.staging_buffers));
  return ctx;
}

namespace detail {

template <class T>
void run_local_fft(const LocalFftStage& stage, int rank,
                   std::vector<T>& real_buf, std::vector<cx<T>>& cplx_buf,
                   transport::Clock* clock, TimingBreakdown* timers) {
  const LocalExtents before = stage.before.extents_of(rank);
  const std::size_t nd = before.axes.size();
  std::int64_t lead = 1, trail = 1;
  for (int a = 0; a < stage.axis; ++a) lead *= before.axes[a].length;
  for (std::size_t a = stage.axis + 1; a < nd; ++a) {
    trail *= before.axes[a].length;
  }
  const std::int64_t n_before = before.axes[stage.axis].length;
  if (lead * trail * n_before == 0) return;

  const double t0 = timing::mark(clock);
  FftWorkspace<T> ws;
  double lane_flops = 0.0;

  if (stage.kind == FftStageKind::C2C) {
    const Kernel1d<T> kernel(static_cast<std::size_t>(n_before), stage.dir);
    for (std::int64_t l = 0; l < lead; ++l) {
      cx<T>* base = cplx_buf.data() + l * n_before * trail;
      for (std::int64_t t = 0; t < trail; ++t) {
        kernel.run(base + t, static_cast<std::size_t>(trail), ws);
      }
    }
    lane_flops = 5.0 * static_cast<double>(lead * n_before * trail) *
                 std::log2(static_cast<double>(n_before));
  } else if (stage.kind == FftStageKind::R2C) {
    const std::int64_t n_out = stage.after.extents_of(rank).axes[stage.axis].length;
    const Kernel1d<T> kernel(static_cast<std::size_t>(n_before), stage.dir);
    std::vector<cx<T>> out(static_cast<std::size_t>(lead * n_out));
    std::vector<cx<T>> lane(static_cast<std::size_t>(n_before));
    for (std::int64_t l = 0; l < lead; ++l) {
      const T* src = real_buf.data() + l * n_before;
      for (std::int64_t i = 0; i < n_before; ++i) lane[i] = cx<T>(src[i], T(0));
      kernel.run(lane.data(), 1, ws);
      std::copy(lane.begin(), lane.begin() + n_out, out.begin() + l * n_out);
    }
    cplx_buf = std::move(out);
    real_buf.clear();
    lane_flops = 5.0 * static_cast<double>(lead * n_before) *
                 std::log2(static_cast<double>(n_before));
  } else {  // C2R
    const std::int64_t n_out = stage.after.extents_of(rank).axes[stage.axis].length;
    std::vector<T> out(static_cast<std::size_t>(lead * n_out));
    T block_scale = T(0);
    for (const auto& v : cplx_buf) block_scale = std::max(block_scale, std::abs(v));
    for (std::int64_t l = 0; l < lead; ++l) {
      auto lane = irfft_1d(
          std::span<const cx<T>>(cplx_buf.data() + l * n_before,
                                 static_cast<std::size_t>(n_before)),
          static_cast<std::size_t>(n_out), block_scale);
      std::copy(lane.begin(), lane.end(), out.begin() + l * n_out);
    }
    real_buf = std::move(out);
    cplx_buf.clear();
    lane_flops = 5.0 * static_cast<double>(lead * n_out) *
                 std::log2(static_cast<double>(n_out));
  }

  if (clock != nullptr) clock->add_compute(lane_flops);
  if (timers != nullptr) timers->local_fft += timing::since(clock, t0);
}

}  // namespace detail

/// Runs the plan's stages in order on this rank's block. Collective across
/// the communicator the context was built on.
template <class T>
DistTensor<T> execute(const Plan<T>& plan, const DistTensor<T>& input,
                      ExecContext& ctx, TimingBreakdown* timers = nullptr) {
  if (!(input.dist == plan.input)) {
    raise(ErrorCode::LayoutMismatch, "input layout differs from the plan's");
  }
  if (plan.options.validate_finite) {
    bool ok = true;
    for (const auto v : input.real) ok = ok && std::isfinite(v);
    for (const auto& v : input.cplx) {
      ok = ok && std::isfinite(v.real()) && std::isfinite(v.imag());
    }
    if (!ok) raise(ErrorCode::ConfigInvalid, "non-finite values in plan input");
  }

  transport::Clock* clock = ctx.world->clock();
  const double t_begin = timing::mark(clock);
  const int rank = input.rank;
  std::vector<T> real_buf = input.real;
  std::vector<cx<T>> cplx_buf = input.cplx;

  for (const auto& stage : plan.stages) {
    if (const auto* f = std::get_if<LocalFftStage>(&stage)) {
      detail::run_local_fft(*f, rank, real_buf, cplx_buf, clock, timers);
    } else if (const auto* t = std::get_if<TransposeStage>(&stage)) {
      const auto step =
          make_transpose_step(t->from, t->to, rank, t->transposed_pack);
      cplx_buf = run_transpose_step(*ctx.axis_comms[t->grid_axis],
                                    std::span<const cx<T>>(cplx_buf), step,
                                    plan.options.exchange, ctx.arena.get(),
                                    timers, plan.options.chunks_per_peer);
    } else if (const auto* l = std::get_if<LocalTransposeStage>(&stage)) {
      const LocalExtents ext = l->dist.extents_of(rank);
      std::int64_t super = 1;
      for (std::size_t a = 2; a < ext.axes.size(); ++a) {
        super *= ext.axes[a].length;
      }
      if (ext.count() > 0) {
        const double t0 = timing::mark(clock);
        cplx_buf = local_transpose(std::span<const cx<T>>(cplx_buf),
                                   ext.axes[1].length, ext.axes[0].length,
                                   super);
        if (clock != nullptr) {
          clock->add_host_copy(cplx_buf.size() * sizeof(cx<T>));
        }
        if (timers != nullptr) timers->unpack += timing::since(clock, t0);
      }
    } else if (const auto* n = std::get_if<NormalizeStage>(&stage)) {
      const double t0 = timing::mark(clock);
      if (!real_buf.empty()) {
        simd::scale(real_buf.data(), real_buf.size(),
                    static_cast<T>(n->factor));
      }
      if (!cplx_buf.empty()) {
        simd::scale(reinterpret_cast<T*>(cplx_buf.data()), 2 * cplx_buf.size(),
                    static_cast<T>(n->factor));
      }
      if (clock != nullptr) {
        clock->add_compute(static_cast<double>(
            real_buf.size() + 2 * cplx_buf.size()));
      }
      if (timers != nullptr) timers->local_fft += timing::since(clock, t0);
    }
  }

  DistTensor<T> out;
  out.dist = plan.output;
  out.rank = rank;
  out.real = std::move(real_buf);
  out.cplx = std::move(cplx_buf);
  if (timers != nullptr) timers->total += timing::since(clock, t_begin);
  return out;
}

/// R2C forward then C2R backward; the round trip is the identity (the C2R
/// stages validate Hermitian consistency lane by lane).
template <class T>
DistTensor<T> execute_r2c_c2r_roundtrip(const Plan<T>& forward,
                                        const Plan<T>& backward,
                                        const DistTensor<T>& input,
                                        ExecContext& ctx,
                                        TimingBreakdown* timers = nullptr) {
  if (forward.kind != TransformKind::R2C ||
      backward.kind != TransformKind::C2R ||
      !(forward.dims == backward.dims) || !(forward.grid == backward.grid)) {
    raise(ErrorCode::GridMismatch, "round trip needs matching R2C/C2R plans");
  }
  auto spectrum = execute(forward, input, ctx, timers);
  return execute(backward, spectrum, ctx, timers);
}

}  // namespace dfft
