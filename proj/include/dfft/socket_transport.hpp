// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dfft/transport.hpp"

namespace dfft::transport {

/// Rendezvous address of one rank. Port 0 asks the kernel for a free port
/// (loopback demos and tests); fixed ports come from a host:port list.
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port[,host:port...]".
std::vector<Endpoint> parse_endpoints(const std::string& list);

namespace wire {

// Frame layout (little-endian): 4-byte magic "DFT1", u32 source rank,
// u32 tag, u64 payload length, then the raw payload bytes.
inline constexpr char kMagic[4] = {'D', 'F', 'T', '1'};
inline constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;

std::vector<std::byte> encode_header(std::uint32_t source, std::uint32_t tag,
                                     std::uint64_t payload_len);

}  // namespace wire

namespace detail {

void run_socket_world(int p, std::vector<Endpoint> endpoints,
                      const WorldOptions& options,
                      const std::function<void(Comm&)>& body);

}  // namespace detail

/// Socket world: the same rank/body contract as spawn_world, but every
/// remote message travels a TCP connection using length-prefixed frames
/// ("DFT1" magic, u32 source, u32 tag, u64 payload length, little-endian).
/// Cost models are an in-process-harness feature and are rejected here.
template <class F>
auto spawn_socket_world(int p, F body, std::vector<Endpoint> endpoints = {},
                        WorldOptions options = {}) {
  if (p < 1) raise(ErrorCode::InvalidRank, "world size must be >= 1");
  using R = std::invoke_result_t<F&, Comm&>;
  if constexpr (std::is_void_v<R>) {
    detail::run_socket_world(p, std::move(endpoints), options,
                             [&body](Comm& comm) { body(comm); });
  } else {
    std::vector<R> results(p);
    detail::run_socket_world(p, std::move(endpoints), options,
                             [&body, &results](Comm& comm) {
                               results[comm.rank()] = body(comm);
                             });
    return results;
  }
}

}  // namespace dfft::transport
