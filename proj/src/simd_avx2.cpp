// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

// AVX2 variants of the pointwise kernels. Elementwise entries use plain
// mul/add (no FMA) so results stay bit-identical to the scalar reference;
// the sumsq reduction keeps four independent accumulators and reassociates.

#include "dfft/simd.hpp"

#include <immintrin.h>

namespace dfft::simd {
namespace {

void scale_f64(double* x, std::size_t n, double factor) {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), f));
  }
  for (; i < n; ++i) x[i] *= factor;
}

void scale_f32(float* x, std::size_t n, float factor) {
  const __m256 f = _mm256_set1_ps(factor);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), f));
  }
  for (; i < n; ++i) x[i] *= factor;
}

// Two interleaved complex doubles per vector: [r0 i0 r1 i1].
void cmul_f64(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * i);
    const __m256d vb = _mm256_loadu_pd(b + 2 * i);
    const __m256d ar = _mm256_shuffle_pd(va, va, 0x0);   // [r r r r]
    const __m256d ai = _mm256_shuffle_pd(va, va, 0xF);   // [i i i i]
    const __m256d bsw = _mm256_shuffle_pd(vb, vb, 0x5);  // [i r i r]
    // (ar*br - ai*bi, ar*bi + ai*br)
    const __m256d t0 = _mm256_mul_pd(ar, vb);
    const __m256d t1 = _mm256_mul_pd(ai, bsw);
    _mm256_storeu_pd(out + 2 * i, _mm256_addsub_pd(t0, t1));
  }
  for (; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] = ar * br - ai * bi;
    out[2 * i + 1] = ar * bi + ai * br;
  }
}

void cmul_f32(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256 va = _mm256_loadu_ps(a + 2 * i);
    const __m256 vb = _mm256_loadu_ps(b + 2 * i);
    const __m256 ar = _mm256_moveldup_ps(va);
    const __m256 ai = _mm256_movehdup_ps(va);
    const __m256 bsw = _mm256_permute_ps(vb, 0xB1);
    const __m256 t0 = _mm256_mul_ps(ar, vb);
    const __m256 t1 = _mm256_mul_ps(ai, bsw);
    _mm256_storeu_ps(out + 2 * i, _mm256_addsub_ps(t0, t1));
  }
  for (; i < n; ++i) {
    const float ar = a[2 * i], ai = a[2 * i + 1];
    const float br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] = ar * br - ai * bi;
    out[2 * i + 1] = ar * bi + ai * br;
  }
}

void apply_ik_f64(const double* x, const double* k, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(x + 2 * i);
    const __m128d vk2 = _mm_loadu_pd(k + i);
    const __m256d vk = _mm256_set_m128d(_mm_unpackhi_pd(vk2, vk2),
                                        _mm_unpacklo_pd(vk2, vk2));
    const __m256d xsw = _mm256_shuffle_pd(vx, vx, 0x5);  // [im re im re]
    const __m256d prod = _mm256_mul_pd(vk, xsw);         // [k*im k*re ...]
    const __m256d signs = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
    _mm256_storeu_pd(out + 2 * i, _mm256_xor_pd(prod, signs));
  }
  for (; i < n; ++i) {
    const double re = x[2 * i], im = x[2 * i + 1];
    out[2 * i] = -k[i] * im;
    out[2 * i + 1] = k[i] * re;
  }
}

void apply_neg_ksq_f64(double* x, const double* ksq, double c, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d neg = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d k2 = _mm_loadu_pd(ksq + i);
    const __m256d k4 = _mm256_set_m128d(_mm_unpackhi_pd(k2, k2),
                                        _mm_unpacklo_pd(k2, k2));
    const __m256d m = _mm256_xor_pd(_mm256_add_pd(vc, k4), neg);
    _mm256_storeu_pd(x + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(x + 2 * i), m));
  }
  for (; i < n; ++i) {
    const double m = -(c + ksq[i]);
    x[2 * i] *= m;
    x[2 * i + 1] *= m;
  }
}

double sumsq_f64(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += x[i] * x[i];
  return total;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table = {
      &scale_f64, &scale_f32, &cmul_f64,          &cmul_f32,
      &apply_ik_f64,          &apply_neg_ksq_f64, &sumsq_f64,
  };
  return table;
}

}  // namespace dfft::simd
