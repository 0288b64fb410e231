// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numbers>

#include "dfft/plan.hpp"

namespace dfft {

/// Signed integer frequencies scaled by 2*pi/L per axis, for every locally
/// owned frequency-layout coordinate. `axis_k` keeps the full Nyquist
/// magnitude (used by |k|^2 multipliers); `axis_k_deriv` zeroes the Nyquist
/// mode (first-derivative convention, keeps real fields real).
struct WavenumberMap {
  std::vector<std::vector<double>> axis_k;
  std::vector<std::vector<double>> axis_k_deriv;
};

/// Wavenumbers for this rank's block of a frequency layout. `spatial_dims`
/// disambiguates the half-spectrum last axis (R2C stores floor(N/2)+1 bins).
inline WavenumberMap wavenumbers(const Distribution& freq,
                                 const GlobalDims& spatial_dims,
                                 std::span<const double> domain_lengths,
                                 int rank) {
  if (!freq.all_hatted() || freq.element != ElementKind::Complex) {
    raise(ErrorCode::NotFrequencyLayout,
          "wavenumbers need a fully transformed complex layout");
  }
  if (domain_lengths.size() != freq.dims.ndim()) {
    raise(ErrorCode::NotFrequencyLayout, "one domain length per axis");
  }
  const LocalExtents ext = freq.extents_of(rank);
  const std::size_t nd = freq.dims.ndim();
  WavenumberMap map;
  map.axis_k.resize(nd);
  map.axis_k_deriv.resize(nd);
  for (std::size_t a = 0; a < nd; ++a) {
    const std::int64_t n_full = spatial_dims[a];
    const bool half = freq.dims[a] != n_full;  // R2C last axis
    const double scale = 2.0 * std::numbers::pi / domain_lengths[a];
    map.axis_k[a].resize(ext.axes[a].length);
    map.axis_k_deriv[a].resize(ext.axes[a].length);
    for (std::int64_t i = 0; i < ext.axes[a].length; ++i) {
      const std::int64_t g = ext.axes[a].offset + i;
      std::int64_t k = g;
      if (!half && 2 * g >= n_full) k = g - n_full;  // Nyquist lands at -N/2
      const bool nyquist = n_full % 2 == 0 && 2 * std::abs(k) == n_full;
      map.axis_k[a][i] = scale * static_cast<double>(k);
      map.axis_k_deriv[a][i] = nyquist ? 0.0 : scale * static_cast<double>(k);
    }
  }
  return map;
}

/// Plans, sub-communicators and wavenumber tables for spectral operators on
/// one (dims, grid, comm) triple. Real fields ride the R2C/C2R pair; complex
/// fields the C2C pair.
template <class T>
struct SpectralContext {
  transport::Comm* comm = nullptr;
  GlobalDims dims;
  ProcessGrid grid;
  std::vector<double> domain_lengths;
  Plan<T> fwd_c2c, bwd_c2c, fwd_r2c, bwd_c2r;
  WavenumberMap k_c2c, k_r2c;
  ExecContext exec;
};

template <class T>
SpectralContext<T> make_spectral_context(
    transport::Comm& comm, const GlobalDims& dims, const ProcessGrid& grid,
    std::vector<double> domain_lengths = {}) {
  SpectralContext<T> ctx;
  ctx.comm = &comm;
  ctx.dims = dims;
  ctx.grid = grid;
  if (domain_lengths.empty()) {
    domain_lengths.assign(dims.ndim(), 2.0 * std::numbers::pi);
  }
  ctx.domain_lengths = std::move(domain_lengths);
  ctx.fwd_c2c = detail::build_nd_plan<T>(dims, grid, TransformKind::C2C,
                                         Direction::Forward, {});
  ctx.bwd_c2c = detail::build_nd_plan<T>(dims, grid, TransformKind::C2C,
                                         Direction::Backward, {});
  ctx.fwd_r2c = detail::build_nd_plan<T>(dims, grid, TransformKind::R2C,
                                         Direction::Forward, {});
  ctx.bwd_c2r = detail::build_nd_plan<T>(dims, grid, TransformKind::C2R,
                                         Direction::Backward, {});
  ctx.k_c2c = wavenumbers(ctx.fwd_c2c.output, dims, ctx.domain_lengths,
                          comm.rank());
  ctx.k_r2c = wavenumbers(ctx.fwd_r2c.output, dims, ctx.domain_lengths,
                          comm.rank());
  ctx.exec = make_context(ctx.fwd_c2c, comm);
  return ctx;
}

namespace detail {

/// Applies f(row_span, inner_k_index_base, outer_coords) over the local
/// frequency block, one last-axis row at a time.
template <class T, class F>
void for_each_spectrum_row(const Distribution& freq, int rank,
                           std::vector<cx<T>>& data, F&& f) {
  const LocalExtents ext = freq.extents_of(rank);
  const std::size_t nd = ext.axes.size();
  const std::int64_t inner = ext.axes[nd - 1].length;
  if (inner == 0) return;
  std::int64_t rows = 1;
  for (std::size_t a = 0; a + 1 < nd; ++a) rows *= ext.axes[a].length;
  std::vector<std::int64_t> idx(nd - 1, 0);
  for (std::int64_t row = 0; row < rows; ++row) {
    f(std::span<cx<T>>(data.data() + row * inner,
                       static_cast<std::size_t>(inner)),
      idx);
    for (std::size_t a = nd - 1; a-- > 0;) {
      if (++idx[a] < ext.axes[a].length) break;
      idx[a] = 0;
    }
  }
}

template <class T>
bool is_real_field(const DistTensor<T>& x) {
  return x.dist.element == ElementKind::Real;
}

}  // namespace detail

/// One derivative component: backward(i*k_axis (.) forward(x)), normalized.
template <class T>
DistTensor<T> derivative(SpectralContext<T>& ctx, const DistTensor<T>& x,
                         int axis) {
  const bool real = detail::is_real_field(x);
  const auto& fwd = real ? ctx.fwd_r2c : ctx.fwd_c2c;
  const auto& bwd = real ? ctx.bwd_c2r : ctx.bwd_c2c;
  const auto& kmap = real ? ctx.k_r2c : ctx.k_c2c;
  auto spectrum = execute(fwd, x, ctx.exec);

  const std::size_t nd = ctx.dims.ndim();
  std::vector<double> k_inner;
  detail::for_each_spectrum_row<T>(
      fwd.output, x.rank, spectrum.cplx,
      [&](std::span<cx<T>> row, const std::vector<std::int64_t>& outer) {
        if (axis + 1 == static_cast<int>(nd)) {
          k_inner.assign(kmap.axis_k_deriv[nd - 1].begin(),
                         kmap.axis_k_deriv[nd - 1].end());
        } else {
          k_inner.assign(row.size(), kmap.axis_k_deriv[axis][outer[axis]]);
        }
        if constexpr (std::is_same_v<T, double>) {
          simd::ops().apply_ik_f64(reinterpret_cast<const double*>(row.data()),
                                   k_inner.data(),
                                   reinterpret_cast<double*>(row.data()),
                                   row.size());
        } else {
          for (std::size_t i = 0; i < row.size(); ++i) {
            const cx<T> v = row[i];
            row[i] = cx<T>(static_cast<T>(-k_inner[i] * v.imag()),
                           static_cast<T>(k_inner[i] * v.real()));
          }
        }
      });
  return execute(bwd, spectrum, ctx.exec);
}

/// All d+1 derivative components of a scalar field.
template <class T>
std::vector<DistTensor<T>> gradient(SpectralContext<T>& ctx,
                                    const DistTensor<T>& x) {
  std::vector<DistTensor<T>> components;
  for (std::size_t a = 0; a < ctx.dims.ndim(); ++a) {
    components.push_back(derivative(ctx, x, static_cast<int>(a)));
  }
  return components;
}

/// Divergence of a vector field: sum of i*k_j-weighted spectra, one inverse
/// transform.
template <class T>
DistTensor<T> divergence(SpectralContext<T>& ctx,
                         const std::vector<DistTensor<T>>& components) {
  if (components.size() != ctx.dims.ndim()) {
    raise(ErrorCode::GridMismatch, "one component per axis required");
  }
  const bool real = detail::is_real_field(components[0]);
  const auto& fwd = real ? ctx.fwd_r2c : ctx.fwd_c2c;
  const auto& bwd = real ? ctx.bwd_c2r : ctx.bwd_c2c;
  const auto& kmap = real ? ctx.k_r2c : ctx.k_c2c;
  const std::size_t nd = ctx.dims.ndim();

  DistTensor<T> acc;
  std::vector<double> k_inner;
  for (std::size_t axis = 0; axis < nd; ++axis) {
    auto spectrum = execute(fwd, components[axis], ctx.exec);
    detail::for_each_spectrum_row<T>(
        fwd.output, components[axis].rank, spectrum.cplx,
        [&](std::span<cx<T>> row, const std::vector<std::int64_t>& outer) {
          if (axis + 1 == nd) {
            k_inner.assign(kmap.axis_k_deriv[nd - 1].begin(),
                           kmap.axis_k_deriv[nd - 1].end());
          } else {
            k_inner.assign(row.size(), kmap.axis_k_deriv[axis][outer[axis]]);
          }
          for (std::size_t i = 0; i < row.size(); ++i) {
            const cx<T> v = row[i];
            row[i] = cx<T>(static_cast<T>(-k_inner[i] * v.imag()),
                           static_cast<T>(k_inner[i] * v.real()));
          }
        });
    if (axis == 0) {
      acc = std::move(spectrum);
    } else {
      for (std::size_t i = 0; i < acc.cplx.size(); ++i) {
        acc.cplx[i] += spectrum.cplx[i];
      }
    }
  }
  return execute(bwd, acc, ctx.exec);
}

/// backward(-|k|^2 (.) forward(x)), normalized.
template <class T>
DistTensor<T> laplacian(SpectralContext<T>& ctx, const DistTensor<T>& x) {
  const bool real = detail::is_real_field(x);
  const auto& fwd = real ? ctx.fwd_r2c : ctx.fwd_c2c;
  const auto& bwd = real ? ctx.bwd_c2r : ctx.bwd_c2c;
  const auto& kmap = real ? ctx.k_r2c : ctx.k_c2c;
  auto spectrum = execute(fwd, x, ctx.exec);

  const std::size_t nd = ctx.dims.ndim();
  std::vector<double> ksq_inner(kmap.axis_k[nd - 1].size());
  for (std::size_t i = 0; i < ksq_inner.size(); ++i) {
    ksq_inner[i] = kmap.axis_k[nd - 1][i] * kmap.axis_k[nd - 1][i];
  }
  detail::for_each_spectrum_row<T>(
      fwd.output, x.rank, spectrum.cplx,
      [&](std::span<cx<T>> row, const std::vector<std::int64_t>& outer) {
        double c = 0.0;
        for (std::size_t a = 0; a + 1 < nd; ++a) {
          const double k = kmap.axis_k[a][outer[a]];
          c += k * k;
        }
        if constexpr (std::is_same_v<T, double>) {
          simd::ops().apply_neg_ksq_f64(reinterpret_cast<double*>(row.data()),
                                        ksq_inner.data(), c, row.size());
        } else {
          for (std::size_t i = 0; i < row.size(); ++i) {
            row[i] *= static_cast<T>(-(c + ksq_inner[i]));
          }
        }
      });
  return execute(bwd, spectrum, ctx.exec);
}

/// Relative mean-magnitude bound accepted as "zero mean".
constexpr double kZeroMeanTol = 1e-12;

/// Divides by -|k|^2, pinning the k=0 bin to zero. The input must have zero
/// mean: |spectrum(0)| <= kZeroMeanTol * N.
template <class T>
DistTensor<T> inverse_laplacian(SpectralContext<T>& ctx,
                                const DistTensor<T>& x) {
  const bool real = detail::is_real_field(x);
  const auto& fwd = real ? ctx.fwd_r2c : ctx.fwd_c2c;
  const auto& bwd = real ? ctx.bwd_c2r : ctx.bwd_c2c;
  const auto& kmap = real ? ctx.k_r2c : ctx.k_c2c;
  auto spectrum = execute(fwd, x, ctx.exec);

  const std::size_t nd = ctx.dims.ndim();
  const LocalExtents ext = fwd.output.extents_of(x.rank);
  const bool owns_zero = [&] {
    for (std::size_t a = 0; a < nd; ++a) {
      if (ext.axes[a].offset > 0 || ext.axes[a].length == 0) return false;
    }
    return true;
  }();
  if (owns_zero) {
    const double tol =
        kZeroMeanTol * static_cast<double>(ctx.dims.total());
    if (std::abs(cx<double>(spectrum.cplx[0])) > tol) {
      raise(ErrorCode::NonZeroMean,
            "inverse_laplacian needs a zero-mean field");
    }
  }

  detail::for_each_spectrum_row<T>(
      fwd.output, x.rank, spectrum.cplx,
      [&](std::span<cx<T>> row, const std::vector<std::int64_t>& outer) {
        double c = 0.0;
        for (std::size_t a = 0; a + 1 < nd; ++a) {
          const double k = kmap.axis_k[a][outer[a]];
          c += k * k;
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
          const double k = kmap.axis_k[nd - 1][i];
          const double m = c + k * k;
          if (m == 0.0) {
            row[i] = cx<T>(0, 0);
          } else {
            row[i] = cx<T>(static_cast<T>(row[i].real() / -m),
                           static_cast<T>(row[i].imag() / -m));
          }
        }
      });
  return execute(bwd, spectrum, ctx.exec);
}

}  // namespace dfft
