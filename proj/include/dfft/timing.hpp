// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>

#include "dfft/transport.hpp"

namespace dfft {

/// Per-execution component accumulators, in virtual seconds under a cost
/// model and wall seconds otherwise.
struct TimingBreakdown {
  double local_fft = 0.0;
  double pack = 0.0;
  double unpack = 0.0;
  double staging_copy = 0.0;
  double wire_comm = 0.0;
  double total = 0.0;

  double component_sum() const {
    return local_fft + pack + unpack + staging_copy + wire_comm;
  }

  /// Reduction across ranks: componentwise max.
  void max_with(const TimingBreakdown& other) {
    local_fft = std::max(local_fft, other.local_fft);
    pack = std::max(pack, other.pack);
    unpack = std::max(unpack, other.unpack);
    staging_copy = std::max(staging_copy, other.staging_copy);
    wire_comm = std::max(wire_comm, other.wire_comm);
    total = std::max(total, other.total);
  }
};

namespace timing {

/// A point on the rank's timeline: virtual clock when present, wall
/// otherwise.
inline double mark(const transport::Clock* clock) {
  if (clock != nullptr) return clock->now();
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

inline double since(const transport::Clock* clock, double start) {
  return mark(clock) - start;
}

}  // namespace timing
}  // namespace dfft
