// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstring>
#include <vector>

#include "dfft/bytes.hpp"
#include "dfft/kernels.hpp"
#include "dfft/layout.hpp"
#include "dfft/transport.hpp"

namespace dfft {

/// One rank's view of a globally defined tensor: the distribution descriptor
/// plus the locally owned block (row-major, last axis fastest). Exactly one
/// of the two buffers is active, per dist.element.
template <class T>
struct DistTensor {
  Distribution dist;
  int rank = 0;
  std::vector<T> real;
  std::vector<cx<T>> cplx;

  static DistTensor zeros(const Distribution& dist, int rank) {
    DistTensor t;
    t.dist = dist;
    t.rank = rank;
    const std::size_t n = static_cast<std::size_t>(dist.local_count(rank));
    if (dist.element == ElementKind::Real) {
      t.real.assign(n, T(0));
    } else {
      t.cplx.assign(n, cx<T>(0, 0));
    }
    return t;
  }

  LocalExtents extents() const { return dist.extents_of(rank); }
  std::size_t local_size() const {
    return dist.element == ElementKind::Real ? real.size() : cplx.size();
  }
};

namespace detail {

/// Visits the contiguous last-axis runs of a local block as
/// (local_offset, global_offset, run_length) triples, in local row-major
/// order. `dims` are the full global dims of the same logical tensor.
template <class F>
void for_each_row(const GlobalDims& dims, const LocalExtents& ext, F&& visit) {
  const std::size_t nd = dims.ndim();
  const std::int64_t run = ext.axes[nd - 1].length;
  if (run == 0) return;
  std::int64_t rows = 1;
  for (std::size_t a = 0; a + 1 < nd; ++a) rows *= ext.axes[a].length;
  std::vector<std::int64_t> idx(nd, 0);
  for (std::int64_t row = 0; row < rows; ++row) {
    std::int64_t global = 0;
    for (std::size_t a = 0; a < nd; ++a) {
      const std::int64_t coord =
          a + 1 < nd ? ext.axes[a].offset + idx[a] : ext.axes[a].offset;
      global = global * dims[a] + coord;
    }
    visit(row * run, global, run);
    for (std::size_t a = nd - 1; a-- > 0;) {
      if (++idx[a] < ext.axes[a].length) break;
      idx[a] = 0;
    }
  }
}

}  // namespace detail

/// Fills the local block from a function of the global coordinate. The same
/// seed yields the same global tensor on every grid.
template <class T, class F>
void fill_from_global(DistTensor<T>& tensor, F&& value_at) {
  const LocalExtents ext = tensor.extents();
  const std::size_t nd = tensor.dist.dims.ndim();
  std::vector<std::int64_t> coord(nd);
  std::vector<std::int64_t> idx(nd, 0);
  const std::int64_t count = ext.count();
  for (std::int64_t flat = 0; flat < count; ++flat) {
    std::int64_t global = 0;
    for (std::size_t a = 0; a < nd; ++a) {
      coord[a] = ext.axes[a].offset + idx[a];
      global = global * tensor.dist.dims[a] + coord[a];
    }
    if (tensor.dist.element == ElementKind::Real) {
      tensor.real[flat] = value_at(global, coord).real();
    } else {
      tensor.cplx[flat] = value_at(global, coord);
    }
    for (std::size_t a = nd; a-- > 0;) {
      if (++idx[a] < ext.axes[a].length) break;
      idx[a] = 0;
    }
  }
}

/// Assembles the full tensor on rank 0 (empty on other ranks). Collective.
template <class E, class T>
std::vector<E> gather_global(transport::Comm& comm, const DistTensor<T>& tensor,
                             std::span<const E> local) {
  auto parts = transport::gather_bytes(comm, bytes::from_values(local));
  std::vector<E> full;
  if (comm.rank() == 0) {
    full.resize(static_cast<std::size_t>(tensor.dist.dims.total()));
    for (int r = 0; r < comm.size(); ++r) {
      const auto values = bytes::to_values<E>(parts[r]);
      const LocalExtents ext = tensor.dist.extents_of(r);
      if (static_cast<std::int64_t>(values.size()) != ext.count()) {
        raise(ErrorCode::CountMismatch, "gathered block size mismatch");
      }
      detail::for_each_row(tensor.dist.dims, ext,
                           [&](std::int64_t local_off, std::int64_t global_off,
                               std::int64_t run) {
                             std::memcpy(full.data() + global_off,
                                         values.data() + local_off,
                                         run * sizeof(E));
                           });
    }
  }
  return full;
}

template <class T>
std::vector<cx<T>> gather_global_complex(transport::Comm& comm,
                                         const DistTensor<T>& tensor) {
  return gather_global<cx<T>>(comm, tensor, std::span<const cx<T>>(tensor.cplx));
}

template <class T>
std::vector<T> gather_global_real(transport::Comm& comm,
                                  const DistTensor<T>& tensor) {
  return gather_global<T>(comm, tensor, std::span<const T>(tensor.real));
}

/// Slices the full tensor held on rank 0 into per-rank blocks. Collective.
template <class T, class E>
DistTensor<T> scatter_global(transport::Comm& comm, const Distribution& dist,
                             std::span<const E> full) {
  std::vector<std::vector<std::byte>> parts;
  if (comm.rank() == 0) {
    if (static_cast<std::int64_t>(full.size()) != dist.dims.total()) {
      raise(ErrorCode::CountMismatch, "full tensor does not match dims");
    }
    parts.resize(comm.size());
    for (int r = 0; r < comm.size(); ++r) {
      const LocalExtents ext = dist.extents_of(r);
      std::vector<E> block(static_cast<std::size_t>(ext.count()));
      detail::for_each_row(dist.dims, ext,
                           [&](std::int64_t local_off, std::int64_t global_off,
                               std::int64_t run) {
                             std::memcpy(block.data() + local_off,
                                         full.data() + global_off,
                                         run * sizeof(E));
                           });
      parts[r] = bytes::from_values(std::span<const E>(block));
    }
  }
  auto mine = transport::scatter_bytes(comm, std::move(parts));
  DistTensor<T> t;
  t.dist = dist;
  t.rank = comm.rank();
  if constexpr (std::is_same_v<E, T>) {
    t.real = bytes::to_values<T>(mine);
  } else {
    t.cplx = bytes::to_values<cx<T>>(mine);
  }
  return t;
}

}  // namespace dfft
