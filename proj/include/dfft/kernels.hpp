// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "dfft/errors.hpp"
#include "dfft/simd.hpp"

namespace dfft {

template <class T>
using cx = std::complex<T>;

enum class Direction { Forward, Backward };

inline Direction reverse(Direction d) {
  return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

/// Addressing for a batch of equally laid-out strided 1-D transforms.
struct BatchSpec {
  std::size_t length = 0;  // transform length n
  std::size_t stride = 1;  // element step within one transform
  std::size_t dist = 0;    // element step between consecutive transforms
  std::size_t count = 0;   // number of transforms
};

namespace detail {

constexpr std::size_t kMaxRadix = 13;  // larger prime factors go to Bluestein

inline std::size_t smallest_prime_factor(std::size_t n) {
  if (n % 2 == 0) return 2;
  for (std::size_t p = 3; p * p <= n; p += 2) {
    if (n % p == 0) return p;
  }
  return n;
}

inline std::size_t largest_prime_factor(std::size_t n) {
  std::size_t largest = 1;
  while (n > 1) {
    const std::size_t p = smallest_prime_factor(n);
    largest = p;
    while (n % p == 0) n /= p;
  }
  return largest;
}

}  // namespace detail

/// w[k] = exp(s * 2*pi*i * k / n) for k in [0, n), s = -1 forward, +1 backward.
/// Immutable after construction; cached per (n, direction) and shared.
template <class T>
class TwiddleTable {
 public:
  TwiddleTable(std::size_t n, Direction dir) : n_(n), w_(n) {
    const double sign = dir == Direction::Forward ? -1.0 : 1.0;
    const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = step * static_cast<double>(k);
      w_[k] = cx<T>(static_cast<T>(std::cos(a)), static_cast<T>(std::sin(a)));
    }
  }

  std::size_t size() const { return n_; }
  const cx<T>& operator[](std::size_t k) const { return w_[k]; }

 private:
  std::size_t n_;
  std::vector<cx<T>> w_;
};

template <class T>
const TwiddleTable<T>& twiddle_table(std::size_t n, Direction dir) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>, std::unique_ptr<TwiddleTable<T>>>
      cache;
  const auto key = std::make_pair(n, dir == Direction::Forward ? 0 : 1);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<TwiddleTable<T>>(n, dir)).first;
  }
  return *it->second;
}

/// Chirp-z machinery for lengths whose largest prime factor exceeds kMaxRadix.
template <class T>
struct BluesteinContext {
  std::size_t n = 0;
  std::size_t m = 0;                  // power of two >= 2n-1
  std::vector<cx<T>> chirp;           // c_j = exp(s*i*pi*j^2/n), j < n
  std::vector<cx<T>> kernel_fft;      // DFT_m of wrapped conj(chirp), pre-scaled 1/m
};

template <class T>
struct FftWorkspace {
  std::vector<cx<T>> a;     // mixed-radix output / Bluestein convolution buffer
  std::vector<cx<T>> lane;  // gather buffer for strided non-pow2 lanes
};

namespace detail {

template <class T>
void radix2_inplace(cx<T>* d, std::size_t n, std::size_t stride,
                    const TwiddleTable<T>& tw) {
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(d[i * stride], d[j * stride]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cx<T>& lo = d[(base + k) * stride];
        cx<T>& hi = d[(base + k + half) * stride];
        const cx<T> t = hi * tw[k * step];
        hi = lo - t;
        lo += t;
      }
    }
  }
}

// out <- DFT_n of the strided input. tw is the table of the top-level length
// N with tw_step = N/n at this recursion depth.
template <class T>
void mixed_radix_rec(const cx<T>* in, std::size_t in_stride, cx<T>* out,
                     std::size_t n, const TwiddleTable<T>& tw,
                     std::size_t tw_step) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = smallest_prime_factor(n);
  const std::size_t m = n / p;
  for (std::size_t j = 0; j < p; ++j) {
    mixed_radix_rec(in + j * in_stride, in_stride * p, out + j * m, m, tw,
                    tw_step * p);
  }
  // X[s + t*m] = sum_j tw[tw_step*j*s] * w_p^(j*t) * Y_j[s]
  cx<T> tmp[kMaxRadix];
  const std::size_t pstep = tw_step * m;  // w_p = tw[tw_step*m]
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t j = 0; j < p; ++j) {
      tmp[j] = out[j * m + s] * tw[tw_step * j * s];
    }
    if (p == 2) {
      out[s] = tmp[0] + tmp[1];
      out[m + s] = tmp[0] - tmp[1];
    } else {
      for (std::size_t t = 0; t < p; ++t) {
        cx<T> acc = tmp[0];
        for (std::size_t j = 1; j < p; ++j) {
          acc += tmp[j] * tw[pstep * ((j * t) % p)];
        }
        out[t * m + s] = acc;
      }
    }
  }
}

template <class T>
const BluesteinContext<T>& bluestein_context(std::size_t n, Direction dir) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>,
                  std::unique_ptr<BluesteinContext<T>>>
      cache;
  const auto key = std::make_pair(n, dir == Direction::Forward ? 0 : 1);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto ctx = std::make_unique<BluesteinContext<T>>();
    ctx->n = n;
    ctx->m = std::bit_ceil(2 * n - 1);
    const double sign = dir == Direction::Forward ? -1.0 : 1.0;
    ctx->chirp.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      // j^2 reduced mod 2n keeps the argument small and the phase exact.
      const std::uint64_t r = (static_cast<std::uint64_t>(j) * j) % (2 * n);
      const double a = sign * std::numbers::pi * static_cast<double>(r) /
                       static_cast<double>(n);
      ctx->chirp[j] = cx<T>(static_cast<T>(std::cos(a)),
                            static_cast<T>(std::sin(a)));
    }
    std::vector<cx<T>> b(ctx->m, cx<T>(0, 0));
    b[0] = std::conj(ctx->chirp[0]);
    for (std::size_t j = 1; j < n; ++j) {
      b[j] = std::conj(ctx->chirp[j]);
      b[ctx->m - j] = b[j];
    }
    radix2_inplace(b.data(), ctx->m, 1,
                   twiddle_table<T>(ctx->m, Direction::Forward));
    const T inv_m = static_cast<T>(1) / static_cast<T>(ctx->m);
    for (auto& v : b) v *= inv_m;
    ctx->kernel_fft = std::move(b);
    it = cache.emplace(key, std::move(ctx)).first;
  }
  return *it->second;
}

}  // namespace detail

/// A resolved 1-D transform recipe: twiddle/chirp tables are looked up once
/// and reused across every lane of a batch.
template <class T>
class Kernel1d {
 public:
  Kernel1d() = default;

  Kernel1d(std::size_t n, Direction dir) : n_(n), dir_(dir) {
    if (n == 0) raise(ErrorCode::ZeroLength, "transform length must be >= 1");
    if (n == 1) {
      path_ = Path::Identity;
    } else if (std::has_single_bit(n)) {
      path_ = Path::Radix2;
      tw_ = &twiddle_table<T>(n, dir);
    } else if (detail::largest_prime_factor(n) <= detail::kMaxRadix) {
      path_ = Path::MixedRadix;
      tw_ = &twiddle_table<T>(n, dir);
    } else {
      path_ = Path::Bluestein;
      bs_ = &detail::bluestein_context<T>(n, dir);
      tw_m_fwd_ = &twiddle_table<T>(bs_->m, Direction::Forward);
      tw_m_bwd_ = &twiddle_table<T>(bs_->m, Direction::Backward);
    }
  }

  std::size_t length() const { return n_; }
  Direction direction() const { return dir_; }

  /// Transform one lane in place. Pow2 lanes run strided butterflies
  /// directly; other lengths gather to a contiguous scratch lane first.
  void run(cx<T>* d, std::size_t stride, FftWorkspace<T>& ws) const {
    switch (path_) {
      case Path::Identity:
        return;
      case Path::Radix2:
        detail::radix2_inplace(d, n_, stride, *tw_);
        return;
      case Path::MixedRadix:
      case Path::Bluestein:
        break;
    }
    cx<T>* lane = d;
    if (stride != 1) {
      ws.lane.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) ws.lane[i] = d[i * stride];
      lane = ws.lane.data();
    }
    if (path_ == Path::MixedRadix) {
      ws.a.resize(n_);
      detail::mixed_radix_rec(lane, std::size_t{1}, ws.a.data(), n_, *tw_,
                              std::size_t{1});
      for (std::size_t i = 0; i < n_; ++i) lane[i] = ws.a[i];
    } else {
      run_bluestein(lane, ws);
    }
    if (stride != 1) {
      for (std::size_t i = 0; i < n_; ++i) d[i * stride] = ws.lane[i];
    }
  }

 private:
  enum class Path { Identity, Radix2, MixedRadix, Bluestein };

  void run_bluestein(cx<T>* lane, FftWorkspace<T>& ws) const {
    const auto& ctx = *bs_;
    ws.a.assign(ctx.m, cx<T>(0, 0));
    for (std::size_t j = 0; j < n_; ++j) ws.a[j] = lane[j] * ctx.chirp[j];
    detail::radix2_inplace(ws.a.data(), ctx.m, 1, *tw_m_fwd_);
    simd::cmul(reinterpret_cast<const T*>(ws.a.data()),
               reinterpret_cast<const T*>(ctx.kernel_fft.data()),
               reinterpret_cast<T*>(ws.a.data()), ctx.m);
    detail::radix2_inplace(ws.a.data(), ctx.m, 1, *tw_m_bwd_);
    for (std::size_t k = 0; k < n_; ++k) lane[k] = ws.a[k] * ctx.chirp[k];
  }

  std::size_t n_ = 1;
  Direction dir_ = Direction::Forward;
  Path path_ = Path::Identity;
  const TwiddleTable<T>* tw_ = nullptr;
  const BluesteinContext<T>* bs_ = nullptr;
  const TwiddleTable<T>* tw_m_fwd_ = nullptr;
  const TwiddleTable<T>* tw_m_bwd_ = nullptr;
};

/// Unnormalized DFT of one contiguous vector (no 1/n on Backward; plans own
/// normalization).
template <class T>
std::vector<cx<T>> fft_1d(std::vector<cx<T>> data, Direction dir) {
  const Kernel1d<T> kernel(data.size(), dir);
  FftWorkspace<T> ws;
  kernel.run(data.data(), 1, ws);
  return data;
}

/// Strided batched transforms, in place. Lanes are independent; each equals
/// fft_1d of the gathered lane.
template <class T>
void fft_batched(std::span<cx<T>> buf, const BatchSpec& spec, Direction dir) {
  if (spec.count == 0) return;
  const Kernel1d<T> kernel(spec.length, dir);
  const std::size_t last =
      (spec.count - 1) * spec.dist + (spec.length - 1) * spec.stride;
  if (last >= buf.size()) {
    raise(ErrorCode::OutOfBounds, "batch addresses past the buffer end");
  }
  FftWorkspace<T> ws;
  for (std::size_t lane = 0; lane < spec.count; ++lane) {
    kernel.run(buf.data() + lane * spec.dist, spec.stride, ws);
  }
}

/// Forward real-to-complex transform: first floor(n/2)+1 bins of the full
/// spectrum; the rest is recoverable by Hermitian symmetry.
template <class T>
std::vector<cx<T>> rfft_1d(std::span<const T> data,
                           Direction dir = Direction::Forward) {
  if (dir != Direction::Forward) {
    raise(ErrorCode::ConfigInvalid, "rfft_1d is forward-only; use irfft_1d");
  }
  const std::size_t n = data.size();
  if (n == 0) raise(ErrorCode::ZeroLength, "rfft_1d of empty input");
  std::vector<cx<T>> full(n);
  for (std::size_t i = 0; i < n; ++i) full[i] = cx<T>(data[i], T(0));
  full = fft_1d(std::move(full), Direction::Forward);
  full.resize(n / 2 + 1);
  return full;
}

template <class T>
constexpr T hermitian_tolerance() {
  if constexpr (sizeof(T) == 8) {
    return T(1e-6);
  } else {
    return T(1e-2);
  }
}

/// Inverse of rfft_1d, unnormalized: irfft_1d(rfft_1d(x), n) == n*x. The
/// DC bin (and Nyquist bin for even n) must be real within tolerance,
/// measured against the lane magnitude or `scale_hint`, whichever is larger
/// (batched callers pass their block magnitude so near-zero lanes tolerate
/// roundoff residue).
template <class T>
std::vector<T> irfft_1d(std::span<const cx<T>> spectrum, std::size_t n,
                        T scale_hint = T(0)) {
  if (n == 0) raise(ErrorCode::ZeroLength, "irfft_1d with zero output length");
  if (spectrum.size() != n / 2 + 1) {
    raise(ErrorCode::LengthMismatch, "spectrum length must be floor(n/2)+1");
  }
  T scale = scale_hint;
  for (const auto& v : spectrum) scale = std::max(scale, std::abs(v));
  const T tol = hermitian_tolerance<T>() * scale;
  if (std::abs(spectrum[0].imag()) > tol) {
    raise(ErrorCode::NonHermitian, "DC bin has a non-real component");
  }
  if (n % 2 == 0 && std::abs(spectrum[n / 2].imag()) > tol) {
    raise(ErrorCode::NonHermitian, "Nyquist bin has a non-real component");
  }
  std::vector<cx<T>> full(n);
  full[0] = cx<T>(spectrum[0].real(), T(0));
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    full[k] = spectrum[k];
    if (n - k != k) full[n - k] = std::conj(spectrum[k]);
  }
  if (n % 2 == 0 && n > 1) full[n / 2] = cx<T>(spectrum[n / 2].real(), T(0));
  full = fft_1d(std::move(full), Direction::Backward);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = full[i].real();
  return out;
}

/// Element guard keeping the O(N^2) oracle desk-scale.
constexpr std::int64_t kOracleGuard = std::int64_t{1} << 16;

/// Brute-force multidimensional DFT by direct summation. Ground truth for
/// every transform path; evaluated in double regardless of T.
template <class T>
std::vector<cx<T>> dft_oracle(std::span<const cx<T>> in,
                              std::span<const std::int64_t> dims,
                              Direction dir) {
  std::int64_t total = 1;
  for (const auto d : dims) {
    if (d < 1) raise(ErrorCode::ZeroLength, "oracle dims must be >= 1");
    total *= d;
  }
  if (total > kOracleGuard) {
    raise(ErrorCode::TooLarge, "oracle input exceeds the element guard");
  }
  if (static_cast<std::int64_t>(in.size()) != total) {
    raise(ErrorCode::LengthMismatch, "oracle input does not match dims");
  }
  const double sign = dir == Direction::Forward ? -1.0 : 1.0;
  const std::size_t nd = dims.size();
  std::vector<std::vector<cx<double>>> w(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    w[d].resize(dims[d]);
    const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(dims[d]);
    for (std::int64_t r = 0; r < dims[d]; ++r) {
      w[d][r] = std::polar(1.0, step * static_cast<double>(r));
    }
  }
  std::vector<cx<T>> out(total);
  std::vector<std::int64_t> kc(nd, 0), jc(nd, 0);
  for (std::int64_t k = 0; k < total; ++k) {
    cx<double> acc(0, 0);
    std::fill(jc.begin(), jc.end(), 0);
    for (std::int64_t j = 0; j < total; ++j) {
      cx<double> phase(1, 0);
      for (std::size_t d = 0; d < nd; ++d) {
        phase *= w[d][(jc[d] * kc[d]) % dims[d]];
      }
      acc += cx<double>(in[j].real(), in[j].imag()) * phase;
      for (std::size_t d = nd; d-- > 0;) {
        if (++jc[d] < dims[d]) break;
        jc[d] = 0;
      }
    }
    out[k] = cx<T>(static_cast<T>(acc.real()), static_cast<T>(acc.imag()));
    for (std::size_t d = nd; d-- > 0;) {
      if (++kc[d] < dims[d]) break;
      kc[d] = 0;
    }
  }
  return out;
}

template <class T>
std::vector<cx<T>> dft_oracle(std::span<const T> real_in,
                              std::span<const std::int64_t> dims,
                              Direction dir) {
  std::vector<cx<T>> promoted(real_in.size());
  for (std::size_t i = 0; i < real_in.size(); ++i) {
    promoted[i] = cx<T>(real_in[i], T(0));
  }
  return dft_oracle<T>(promoted, dims, dir);
}

}  // namespace dfft
