// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "dfft/errors.hpp"

namespace dfft {

enum class ElementKind { Real, Complex };

/// Global tensor extents [N0, N1, ..., Nd], last axis fastest in memory.
struct GlobalDims {
  std::vector<std::int64_t> extent;

  GlobalDims() = default;
  GlobalDims(std::initializer_list<std::int64_t> dims) : extent(dims) {}
  explicit GlobalDims(std::vector<std::int64_t> dims) : extent(std::move(dims)) {}

  std::size_t ndim() const { return extent.size(); }
  std::int64_t operator[](std::size_t axis) const { return extent[axis]; }
  std::int64_t& operator[](std::size_t axis) { return extent[axis]; }
  std::int64_t total() const {
    return std::accumulate(extent.begin(), extent.end(), std::int64_t{1},
                           std::multiplies<>());
  }
  bool operator==(const GlobalDims&) const = default;
};

/// Ranks arranged on a Cartesian grid, row-major rank order.
struct ProcessGrid {
  std::vector<int> shape;

  ProcessGrid() = default;
  ProcessGrid(std::initializer_list<int> s) : shape(s) {}
  explicit ProcessGrid(std::vector<int> s) : shape(std::move(s)) {}

  std::size_t ndim() const { return shape.size(); }
  int size() const {
    return std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<>());
  }

  std::vector<int> coords_of(int rank) const {
    std::vector<int> c(shape.size());
    for (std::size_t g = shape.size(); g-- > 0;) {
      c[g] = rank % shape[g];
      rank /= shape[g];
    }
    return c;
  }

  int rank_of(std::span<const int> coords) const {
    int r = 0;
    for (std::size_t g = 0; g < shape.size(); ++g) r = r * shape[g] + coords[g];
    return r;
  }

  bool operator==(const ProcessGrid&) const = default;
};

/// Contiguous ceil-block partition of one axis: rank r owns
/// [r*ceil(n/p), min((r+1)*ceil(n/p), n)); trailing blocks may be empty.
struct BlockMap {
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> offsets;

  std::int64_t total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  }
  bool operator==(const BlockMap&) const = default;
};

inline BlockMap block_map(std::int64_t n, int p) {
  BlockMap map;
  map.counts.resize(p);
  map.offsets.resize(p);
  const std::int64_t block = p > 0 ? (n + p - 1) / p : 0;
  for (int r = 0; r < p; ++r) {
    const std::int64_t lo = std::min<std::int64_t>(r * block, n);
    const std::int64_t hi = std::min<std::int64_t>((r + 1) * block, n);
    map.offsets[r] = lo;
    map.counts[r] = hi - lo;
  }
  return map;
}

/// Which block of block_map(n, p) contains index i. O(1) by the ceil rule.
inline int block_owner(std::int64_t n, int p, std::int64_t i) {
  const std::int64_t block = (n + p - 1) / p;
  return static_cast<int>(i / block);
}

struct AxisExtent {
  std::int64_t offset = 0;
  std::int64_t length = 0;
  bool operator==(const AxisExtent&) const = default;
};

/// Per-rank owned block: per-axis (offset, length) into the global index
/// space, stored row-major with the last axis fastest.
struct LocalExtents {
  std::vector<AxisExtent> axes;

  std::int64_t count() const {
    std::int64_t n = 1;
    for (const auto& a : axes) n *= a.length;
    return n;
  }
  bool operator==(const LocalExtents&) const = default;
};

constexpr int kAxisLocal = -1;

/// How a tensor is spread over a process grid: grid axis g decomposes tensor
/// axis axis_of_grid[g] with the ceil-block rule; every other axis is local.
/// `dims` holds the current logical lengths (already the hatted lengths for
/// transformed axes).
struct Distribution {
  GlobalDims dims;
  ProcessGrid grid;
  std::vector<int> axis_of_grid;  // grid axis -> tensor axis
  std::vector<bool> hatted;       // tensor axis already transformed
  ElementKind element = ElementKind::Complex;

  bool operator==(const Distribution&) const = default;

  void validate() const {
    if (axis_of_grid.size() != grid.ndim()) {
      raise(ErrorCode::IncompatibleLayouts,
            "one tensor axis assignment per grid axis required");
    }
    std::vector<bool> seen(dims.ndim(), false);
    for (int axis : axis_of_grid) {
      if (axis < 0 || axis >= static_cast<int>(dims.ndim()) || seen[axis]) {
        raise(ErrorCode::IncompatibleLayouts,
              "each tensor axis may be decomposed by at most one grid axis");
      }
      seen[axis] = true;
    }
  }

  /// Grid axis decomposing `axis`, or kAxisLocal.
  int grid_axis_of(int axis) const {
    for (std::size_t g = 0; g < axis_of_grid.size(); ++g) {
      if (axis_of_grid[g] == axis) return static_cast<int>(g);
    }
    return kAxisLocal;
  }

  bool decomposed(int axis) const { return grid_axis_of(axis) != kAxisLocal; }

  BlockMap axis_blocks(int axis) const {
    const int g = grid_axis_of(axis);
    if (g == kAxisLocal) return block_map(dims[axis], 1);
    return block_map(dims[axis], grid.shape[g]);
  }

  LocalExtents extents_of(int rank) const {
    const auto coords = grid.coords_of(rank);
    LocalExtents ext;
    ext.axes.resize(dims.ndim());
    for (std::size_t axis = 0; axis < dims.ndim(); ++axis) {
      const int g = grid_axis_of(static_cast<int>(axis));
      if (g == kAxisLocal) {
        ext.axes[axis] = {0, dims[axis]};
      } else {
        const BlockMap map = block_map(dims[axis], grid.shape[g]);
        ext.axes[axis] = {map.offsets[coords[g]], map.counts[coords[g]]};
      }
    }
    return ext;
  }

  std::int64_t local_count(int rank) const { return extents_of(rank).count(); }

  bool any_rank_empty() const {
    for (int g = 0; g < static_cast<int>(grid.ndim()); ++g) {
      const BlockMap map = block_map(dims[axis_of_grid[g]], grid.shape[g]);
      if (!map.counts.empty() && map.counts.back() == 0) return true;
    }
    return false;
  }

  bool all_hatted() const {
    return std::all_of(hatted.begin(), hatted.end(), [](bool h) { return h; });
  }
};

enum class TransformKind { C2C, R2C, C2R };

/// Transformed-axis lengths: C2C keeps sizes, R2C stores floor(N_last/2)+1
/// complex bins on the last axis, C2R is the inverse relation given the
/// real-side length.
inline GlobalDims hat_dims(const GlobalDims& dims, TransformKind kind) {
  GlobalDims out = dims;
  if (kind == TransformKind::R2C && !out.extent.empty()) {
    out.extent.back() = out.extent.back() / 2 + 1;
  }
  return out;
}

namespace detail {

inline void check_grid(const GlobalDims& dims, const ProcessGrid& grid) {
  if (dims.ndim() < 2) {
    raise(ErrorCode::IncompatibleLayouts, "need at least two tensor axes");
  }
  if (grid.ndim() < 1 || grid.ndim() > dims.ndim() - 1) {
    raise(ErrorCode::IncompatibleLayouts,
          "grid must have between 1 and ndim-1 axes");
  }
  for (int p : grid.shape) {
    if (p < 1) raise(ErrorCode::IncompatibleLayouts, "grid factors must be >= 1");
  }
  if (grid.ndim() == 1 && grid.shape[0] > dims[0]) {
    raise(ErrorCode::SlabTooManyRanks,
          "slab decomposition needs P <= N0");
  }
}

}  // namespace detail

/// Input-side layout: axes 0..g-1 decomposed by grid axes 0..g-1, trailing
/// axes local. Element kind is Real for R2C (and for the C2R output side).
inline Distribution spatial_layout(const GlobalDims& dims,
                                   const ProcessGrid& grid,
                                   TransformKind kind) {
  detail::check_grid(dims, grid);
  Distribution dist;
  dist.dims = dims;
  dist.grid = grid;
  dist.axis_of_grid.resize(grid.ndim());
  for (std::size_t g = 0; g < grid.ndim(); ++g) {
    dist.axis_of_grid[g] = static_cast<int>(g);
  }
  dist.hatted.assign(dims.ndim(), false);
  dist.element = kind == TransformKind::C2C ? ElementKind::Complex
                                            : ElementKind::Real;
  dist.validate();
  return dist;
}

/// Output-side layout: axis 0 local, axes 1..g decomposed by grid axes
/// 0..g-1, all axes hatted; complex elements.
inline Distribution frequency_layout(const GlobalDims& dims,
                                     const ProcessGrid& grid,
                                     TransformKind kind) {
  detail::check_grid(dims, grid);
  Distribution dist;
  dist.dims = hat_dims(dims, kind == TransformKind::C2R ? TransformKind::R2C
                                                        : kind);
  dist.grid = grid;
  dist.axis_of_grid.resize(grid.ndim());
  for (std::size_t g = 0; g < grid.ndim(); ++g) {
    dist.axis_of_grid[g] = static_cast<int>(g) + 1;
  }
  dist.hatted.assign(dims.ndim(), true);
  dist.element = ElementKind::Complex;
  dist.validate();
  return dist;
}

/// Owner rank and row-major offset within its block for one global
/// coordinate.
inline std::pair<int, std::int64_t> local_index(
    const Distribution& dist, std::span<const std::int64_t> coord) {
  if (coord.size() != dist.dims.ndim()) {
    raise(ErrorCode::OutOfRange, "coordinate rank mismatch");
  }
  for (std::size_t axis = 0; axis < coord.size(); ++axis) {
    if (coord[axis] < 0 || coord[axis] >= dist.dims[axis]) {
      raise(ErrorCode::OutOfRange, "coordinate outside the global dims");
    }
  }
  std::vector<int> grid_coords(dist.grid.ndim(), 0);
  for (std::size_t g = 0; g < dist.grid.ndim(); ++g) {
    const int axis = dist.axis_of_grid[g];
    grid_coords[g] =
        block_owner(dist.dims[axis], dist.grid.shape[g], coord[axis]);
  }
  const int rank = dist.grid.rank_of(grid_coords);
  const LocalExtents ext = dist.extents_of(rank);
  std::int64_t offset = 0;
  for (std::size_t axis = 0; axis < coord.size(); ++axis) {
    offset = offset * ext.axes[axis].length + (coord[axis] - ext.axes[axis].offset);
  }
  return {rank, offset};
}

}  // namespace dfft
