// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

namespace dfft::simd {

enum class Isa { Scalar, Avx2 };

// Runtime-dispatched kernels for the pointwise inner loops. Complex buffers
// are passed as interleaved re,im doubles/floats; `n` counts complex elements
// unless a function says otherwise. All variants of one entry compute the
// same IEEE operation sequence per element, so elementwise results are
// bit-identical across ISAs; reductions may reassociate.
struct Ops {
  // x[i] *= factor, n real elements.
  void (*scale_f64)(double* x, std::size_t n, double factor);
  void (*scale_f32)(float* x, std::size_t n, float factor);
  // out = a * b (complex pointwise), n complex elements.
  void (*cmul_f64)(const double* a, const double* b, double* out, std::size_t n);
  void (*cmul_f32)(const float* a, const float* b, float* out, std::size_t n);
  // out = (i * k[j]) * x[j]: (re,im) -> (-k*im, k*re), n complex elements.
  void (*apply_ik_f64)(const double* x, const double* k, double* out, std::size_t n);
  // x[j] *= -(c + ksq[j]), n complex elements (real multiplier per bin).
  void (*apply_neg_ksq_f64)(double* x, const double* ksq, double c, std::size_t n);
  // sum of squares, n real elements.
  double (*sumsq_f64)(const double* x, std::size_t n);
};

// The table selected for this process (cpuid probe, overridable with the
// DFFT_SIMD environment variable: "scalar" or "avx2").
const Ops& ops();
Isa active_isa();
const char* isa_name(Isa isa);

// Test hook: force a specific table. Throws if the ISA is unsupported here.
void force_isa(Isa isa);

// Reference table (always available); the dispatch target for Isa::Scalar.
const Ops& scalar_ops();
#if DFFT_HAVE_AVX2
const Ops& avx2_ops();
#endif
bool isa_supported(Isa isa);

// Typed conveniences used by the kernels.
inline void scale(double* x, std::size_t n, double f) { ops().scale_f64(x, n, f); }
inline void scale(float* x, std::size_t n, float f) { ops().scale_f32(x, n, f); }
inline void cmul(const double* a, const double* b, double* out, std::size_t n) {
  ops().cmul_f64(a, b, out, n);
}
inline void cmul(const float* a, const float* b, float* out, std::size_t n) {
  ops().cmul_f32(a, b, out, n);
}

}  // namespace dfft::simd
