// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dfft {

/// Machine-checkable failure categories surfaced by the library.
enum class ErrorCode {
  // kernels
  ZeroLength,
  OutOfBounds,
  TooLarge,
  LengthMismatch,
  NonHermitian,
  // layout
  SlabTooManyRanks,
  OutOfRange,
  // transport
  InvalidRank,
  TagMismatchTimeout,
  Deadlock,
  WorkerPanic,
  // exchange
  CountMismatch,
  IncompatibleLayouts,
  ArenaExhausted,
  // plan
  GridMismatch,
  RankTooLow,
  LayoutMismatch,
  // spectral
  NotFrequencyLayout,
  NonZeroMean,
  // bench / tensor file
  BadMagic,
  DimMismatch,
  TruncatedFile,
  ConfigInvalid,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroLength: return "ZeroLength";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::SlabTooManyRanks: return "SlabTooManyRanks";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidRank: return "InvalidRank";
    case ErrorCode::TagMismatchTimeout: return "TagMismatchTimeout";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::WorkerPanic: return "WorkerPanic";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::IncompatibleLayouts: return "IncompatibleLayouts";
    case ErrorCode::ArenaExhausted: return "ArenaExhausted";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::RankTooLow: return "RankTooLow";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::NotFrequencyLayout: return "NotFrequencyLayout";
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "UnknownError";
}

}  // namespace dfft
