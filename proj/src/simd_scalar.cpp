// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "dfft/simd.hpp"

namespace dfft::simd {
namespace {

template <class T>
void scale_impl(T* x, std::size_t n, T factor) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= factor;
}

template <class T>
void cmul_impl(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T ar = a[2 * i], ai = a[2 * i + 1];
    const T br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] = ar * br - ai * bi;
    out[2 * i + 1] = ar * bi + ai * br;
  }
}

void apply_ik_impl(const double* x, const double* k, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[2 * i], im = x[2 * i + 1];
    out[2 * i] = -k[i] * im;
    out[2 * i + 1] = k[i] * re;
  }
}

void apply_neg_ksq_impl(double* x, const double* ksq, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = -(c + ksq[i]);
    x[2 * i] *= m;
    x[2 * i + 1] *= m;
  }
}

double sumsq_impl(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      &scale_impl<double>, &scale_impl<float>,
      &cmul_impl<double>,  &cmul_impl<float>,
      &apply_ik_impl,      &apply_neg_ksq_impl,
      &sumsq_impl,
  };
  return table;
}

}  // namespace dfft::simd
