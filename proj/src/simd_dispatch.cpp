// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "dfft/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace dfft::simd {
namespace {

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Isa> g_isa{Isa::Scalar};

Isa detect_isa() {
  if (const char* env = std::getenv("DFFT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && isa_supported(Isa::Avx2)) return Isa::Avx2;
    return Isa::Scalar;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

const Ops* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &scalar_ops();
    case Isa::Avx2:
#if DFFT_HAVE_AVX2
      return &avx2_ops();
#else
      break;
#endif
  }
  return nullptr;
}

void init_once() {
  if (g_ops.load(std::memory_order_acquire) != nullptr) return;
  const Isa isa = detect_isa();
  g_isa.store(isa, std::memory_order_relaxed);
  g_ops.store(table_for(isa), std::memory_order_release);
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if DFFT_HAVE_AVX2
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Ops& ops() {
  init_once();
  return *g_ops.load(std::memory_order_acquire);
}

Isa active_isa() {
  init_once();
  return g_isa.load(std::memory_order_relaxed);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error(std::string("simd ISA not supported here: ") +
                             isa_name(isa));
  }
  g_isa.store(isa, std::memory_order_relaxed);
  g_ops.store(table_for(isa), std::memory_order_release);
}

}  // namespace dfft::simd
