// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <numeric>

#include "dfft/bytes.hpp"
#include "dfft/socket_transport.hpp"
#include "dfft/transport.hpp"

using namespace dfft;
using namespace dfft::transport;

namespace {

// A small app protocol used to compare backends: ring accumulation plus a
// split and a row-wise exchange. Pure function of (rank, size).
std::vector<std::uint32_t> protocol_body(Comm& comm) {
  std::vector<std::uint32_t> trace;
  const int p = comm.size();
  const int next = (comm.rank() + 1) % p;
  const int prev = (comm.rank() + p - 1) % p;

  std::uint32_t acc = comm.rank() * 17 + 3;
  for (int round = 0; round < 3; ++round) {
    auto pr = comm.irecv(prev, 2);
    std::vector<std::byte> msg;
    bytes::append_u32(msg, acc);
    comm.isend(next, 2, std::move(msg));
    acc = acc * 5 + bytes::read_u32(pr.wait(), 0);
    trace.push_back(acc);
  }

  auto sub = split(comm, comm.rank() % 2, comm.rank());
  barrier(*sub);
  if (sub->size() > 1) {
    const int speer = (sub->rank() + 1) % sub->size();
    auto pr = sub->irecv((sub->rank() + sub->size() - 1) % sub->size(), 3);
    std::vector<std::byte> msg;
    bytes::append_u32(msg, acc);
    sub->isend(speer, 3, std::move(msg));
    acc += bytes::read_u32(pr.wait(), 0);
  }
  trace.push_back(acc);
  barrier(comm);
  return trace;
}

}  // namespace

TEST_CASE("socket world runs the rank body") {
  auto results = spawn_socket_world(2, [](Comm& comm) { return comm.rank(); });
  CHECK(results == std::vector<int>{0, 1});
}

TEST_CASE("socket payloads are byte-identical") {
  auto results = spawn_socket_world(3, [](Comm& comm) -> std::size_t {
    std::vector<std::byte> blob(4096);
    for (std::size_t i = 0; i < blob.size(); ++i) {
      blob[i] = static_cast<std::byte>((i * 131 + comm.rank()) % 256);
    }
    std::vector<PendingRecv> pending;
    for (int src = 0; src < comm.size(); ++src) {
      if (src != comm.rank()) pending.push_back(comm.irecv(src, 1));
    }
    for (int dst = 0; dst < comm.size(); ++dst) {
      if (dst != comm.rank()) comm.isend(dst, 1, blob);
    }
    std::size_t good = 0;
    std::size_t at = 0;
    for (int src = 0; src < comm.size(); ++src) {
      if (src == comm.rank()) continue;
      auto got = pending[at++].wait();
      std::vector<std::byte> want(4096);
      for (std::size_t i = 0; i < want.size(); ++i) {
        want[i] = static_cast<std::byte>((i * 131 + src) % 256);
      }
      if (got == want) ++good;
    }
    return good;
  });
  for (auto good : results) CHECK(good == 2);
}

TEST_CASE("socket and in-process backends agree application-level") {
  for (int p : {1, 2, 4, 5}) {
    auto inproc = spawn_world(p, protocol_body);
    auto socket = spawn_socket_world(p, protocol_body);
    CHECK(inproc == socket);
  }
}

TEST_CASE("worker failure propagates across sockets") {
  CHECK_THROWS_WITH_AS(
      spawn_socket_world(3,
                         [](Comm& comm) -> int {
                           if (comm.rank() == 2) {
                             throw std::runtime_error("socket boom");
                           }
                           comm.irecv((comm.rank() + 1) % 3, 5).wait();
                           return 0;
                         }),
      doctest::Contains("rank 2"), Error);
}

TEST_CASE("cost model is rejected on the socket backend") {
  WorldOptions options;
  options.cost_model = CostModel{};
  CHECK_THROWS_AS(
      spawn_socket_world(2, [](Comm& comm) { return comm.rank(); }, {}, options),
      Error);
}

TEST_CASE("wire framing is pinned byte for byte") {
  const auto header = wire::encode_header(3, 0x00020005, 258);
  REQUIRE(header.size() == wire::kHeaderBytes);
  const unsigned char want[20] = {
      'D', 'F', 'T', '1',       // magic
      3,   0,   0,   0,         // u32 source, little-endian
      5,   0,   2,   0,         // u32 tag (group 2, user tag 5)
      2,   1,   0,   0, 0, 0, 0, 0,  // u64 payload length = 258
  };
  for (std::size_t i = 0; i < sizeof(want); ++i) {
    CHECK(std::to_integer<unsigned>(header[i]) == want[i]);
  }
}

TEST_CASE("endpoint list parsing") {
  auto eps = parse_endpoints("127.0.0.1:9000,127.0.0.1:9001");
  REQUIRE(eps.size() == 2);
  CHECK(eps[0].host == "127.0.0.1");
  CHECK(eps[0].port == 9000);
  CHECK(eps[1].port == 9001);
  CHECK_THROWS_AS(parse_endpoints("nocolon"), Error);
}
