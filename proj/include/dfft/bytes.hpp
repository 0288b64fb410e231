// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "dfft/errors.hpp"

namespace dfft::bytes {

// Little-endian scalar packing shared by the socket framing, the tensor file
// format, and collective bookkeeping messages.

inline void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
}

inline void append_u64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
}

inline std::uint32_t read_u32(std::span<const std::byte> in, std::size_t at) {
  if (at + 4 > in.size()) raise(ErrorCode::TruncatedFile, "short u32 read");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(std::to_integer<unsigned>(in[at + i])) << (8 * i);
  }
  return v;
}

inline std::uint64_t read_u64(std::span<const std::byte> in, std::size_t at) {
  if (at + 8 > in.size()) raise(ErrorCode::TruncatedFile, "short u64 read");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<unsigned>(in[at + i])) << (8 * i);
  }
  return v;
}

template <class T>
std::vector<std::byte> from_values(std::span<const T> values) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::vector<std::byte> out(values.size_bytes());
  if (!values.empty()) std::memcpy(out.data(), values.data(), values.size_bytes());
  return out;
}

template <class T>
std::vector<T> to_values(std::span<const std::byte> raw) {
  static_assert(std::is_trivially_copyable_v<T>);
  if (raw.size() % sizeof(T) != 0) {
    raise(ErrorCode::LengthMismatch, "payload is not a whole number of elements");
  }
  std::vector<T> out(raw.size() / sizeof(T));
  if (!raw.empty()) std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

}  // namespace dfft::bytes
