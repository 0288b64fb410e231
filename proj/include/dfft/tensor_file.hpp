// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "dfft/dist_tensor.hpp"

namespace dfft {

/// On-disk element kinds of the DTNS container.
enum class TensorElement : std::uint8_t {
  Real64 = 0,
  Complex64 = 1,  // interleaved f64 pairs
  Real32 = 2,
  Complex32 = 3,
};

/// In-memory image of one tensor file: magic "DTNS", u32 version=1,
/// u8 element kind, u32 axis count, u64 per-axis dims, little-endian
/// payload, row-major with the last axis fastest.
struct TensorFile {
  GlobalDims dims;
  TensorElement element = TensorElement::Real64;
  std::vector<std::byte> payload;

  std::size_t element_bytes() const {
    switch (element) {
      case TensorElement::Real64: return 8;
      case TensorElement::Complex64: return 16;
      case TensorElement::Real32: return 4;
      case TensorElement::Complex32: return 8;
    }
    return 0;
  }
  bool is_complex() const {
    return element == TensorElement::Complex64 ||
           element == TensorElement::Complex32;
  }
};

TensorFile read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const TensorFile& file);

/// Rank 0 reads the file and scatters blocks; the result follows `dist`.
/// A real-valued file feeding a complex layout is promoted elementwise.
template <class T>
DistTensor<T> read_tensor(transport::Comm& comm, const Distribution& dist,
                          const std::string& path) {
  std::vector<std::byte> header;
  TensorFile file;
  if (comm.rank() == 0) {
    file = read_tensor_file(path);
    if (!(file.dims == dist.dims)) {
      raise(ErrorCode::DimMismatch, "tensor file dims do not match the layout");
    }
  }
  if (dist.element == ElementKind::Real) {
    std::vector<T> full;
    if (comm.rank() == 0) {
      if (file.is_complex()) {
        raise(ErrorCode::DimMismatch,
              "complex tensor file cannot feed a real layout");
      }
      full.resize(static_cast<std::size_t>(dist.dims.total()));
      if (file.element == TensorElement::Real64) {
        const auto v = bytes::to_values<double>(file.payload);
        for (std::size_t i = 0; i < v.size(); ++i) full[i] = static_cast<T>(v[i]);
      } else {
        const auto v = bytes::to_values<float>(file.payload);
        for (std::size_t i = 0; i < v.size(); ++i) full[i] = static_cast<T>(v[i]);
      }
    }
    return scatter_global<T, T>(comm, dist, std::span<const T>(full));
  }
  std::vector<cx<T>> full;
  if (comm.rank() == 0) {
    full.resize(static_cast<std::size_t>(dist.dims.total()));
    switch (file.element) {
      case TensorElement::Complex64: {
        const auto v = bytes::to_values<cx<double>>(file.payload);
        for (std::size_t i = 0; i < v.size(); ++i) {
          full[i] = cx<T>(static_cast<T>(v[i].real()), static_cast<T>(v[i].imag()));
        }
        break;
      }
      case TensorElement::Complex32: {
        const auto v = bytes::to_values<cx<float>>(file.payload);
        for (std::size_t i = 0; i < v.size(); ++i) {
          full[i] = cx<T>(static_cast<T>(v[i].real()), static_cast<T>(v[i].imag()));
        }
        break;
      }
      case TensorElement::Real64: {  // promoted
        const auto v = bytes::to_values<double>(file.payload);
        for (std::size_t i = 0; i < v.size(); ++i) {
          full[i] = cx<T>(static_cast<T>(v[i]), T(0));
        }
        break;
      }
      case TensorElement::Real32: {
        const auto v = bytes::to_values<float>(file.payload);
        for (std::size_t i = 0; i < v.size(); ++i) {
          full[i] = cx<T>(static_cast<T>(v[i]), T(0));
        }
        break;
      }
    }
  }
  return scatter_global<T, cx<T>>(comm, dist, std::span<const cx<T>>(full));
}

/// Gathers the tensor on rank 0 and writes it. Collective.
template <class T>
void write_tensor(transport::Comm& comm, const DistTensor<T>& tensor,
                  const std::string& path) {
  TensorFile file;
  file.dims = tensor.dist.dims;
  if (tensor.dist.element == ElementKind::Real) {
    auto full = gather_global_real(comm, tensor);
    if (comm.rank() != 0) return;
    if constexpr (sizeof(T) == 8) {
      file.element = TensorElement::Real64;
    } else {
      file.element = TensorElement::Real32;
    }
    file.payload = bytes::from_values(std::span<const T>(full));
  } else {
    auto full = gather_global_complex(comm, tensor);
    if (comm.rank() != 0) return;
    if constexpr (sizeof(T) == 8) {
      file.element = TensorElement::Complex64;
    } else {
      file.element = TensorElement::Complex32;
    }
    file.payload = bytes::from_values(std::span<const cx<T>>(full));
  }
  write_tensor_file(path, file);
}

}  // namespace dfft
