// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "dfft/tensor_file.hpp"

#include <cstdio>
#include <memory>

#include "dfft/bytes.hpp"

namespace dfft {
namespace {

constexpr char kMagic[4] = {'D', 'T', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

TensorFile read_tensor_file(const std::string& path) {
  FileHandle f(std::fopen(path.c_str(), "rb"));
  if (!f) raise(ErrorCode::TruncatedFile, "cannot open " + path);

  auto read_exact = [&](std::byte* out, std::size_t n) {
    if (std::fread(out, 1, n, f.get()) != n) {
      raise(ErrorCode::TruncatedFile, "unexpected end of " + path);
    }
  };

  std::byte head[13];
  read_exact(head, sizeof(head));
  for (int i = 0; i < 4; ++i) {
    if (head[i] != static_cast<std::byte>(kMagic[i])) {
      raise(ErrorCode::BadMagic, path + " is not a DTNS tensor");
    }
  }
  const std::uint32_t version = bytes::read_u32(std::span(head), 4);
  if (version != kVersion) {
    raise(ErrorCode::BadMagic, "unsupported DTNS version");
  }
  const auto kind = std::to_integer<std::uint8_t>(head[8]);
  if (kind > 3) raise(ErrorCode::BadMagic, "unknown element kind");
  const std::uint32_t axes = bytes::read_u32(std::span(head), 9);
  if (axes == 0 || axes > 16) {
    raise(ErrorCode::BadMagic, "implausible axis count");
  }

  TensorFile file;
  file.element = static_cast<TensorElement>(kind);
  std::vector<std::byte> dim_raw(8 * axes);
  read_exact(dim_raw.data(), dim_raw.size());
  file.dims.extent.resize(axes);
  for (std::uint32_t a = 0; a < axes; ++a) {
    file.dims.extent[a] =
        static_cast<std::int64_t>(bytes::read_u64(std::span(dim_raw), 8 * a));
    if (file.dims.extent[a] < 1) {
      raise(ErrorCode::BadMagic, "non-positive axis length");
    }
  }

  const std::size_t want = static_cast<std::size_t>(file.dims.total()) *
                           file.element_bytes();
  file.payload.resize(want);
  read_exact(file.payload.data(), want);
  return file;
}

void write_tensor_file(const std::string& path, const TensorFile& file) {
  const std::size_t want = static_cast<std::size_t>(file.dims.total()) *
                           file.element_bytes();
  if (file.payload.size() != want) {
    raise(ErrorCode::DimMismatch, "payload size does not match dims");
  }
  FileHandle f(std::fopen(path.c_str(), "wb"));
  if (!f) raise(ErrorCode::TruncatedFile, "cannot create " + path);

  std::vector<std::byte> header;
  for (char c : kMagic) header.push_back(static_cast<std::byte>(c));
  bytes::append_u32(header, kVersion);
  header.push_back(static_cast<std::byte>(file.element));
  bytes::append_u32(header, static_cast<std::uint32_t>(file.dims.ndim()));
  for (const auto d : file.dims.extent) {
    bytes::append_u64(header, static_cast<std::uint64_t>(d));
  }
  auto write_exact = [&](const std::byte* data, std::size_t n) {
    if (std::fwrite(data, 1, n, f.get()) != n) {
      raise(ErrorCode::TruncatedFile, "short write to " + path);
    }
  };
  write_exact(header.data(), header.size());
  write_exact(file.payload.data(), file.payload.size());
}

}  // namespace dfft
