// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dfft/exchange.hpp"

using namespace dfft;
using namespace dfft::transport;
using cxd = cx<double>;

namespace {

std::vector<double> iota_doubles(std::size_t n, double start = 1.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
  return v;
}

std::vector<cxd> random_complex(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<cxd> v(n);
  for (auto& x : v) x = cxd(u(rng), u(rng));
  return v;
}

}  // namespace

TEST_CASE("pack") {
  SUBCASE("single destination is the identity copy") {
    auto in = iota_doubles(12);
    TransposeSpec spec{1, 3, 4, 1, block_map(4, 1), ScatterDim::Cols,
                       GatherDim::Cols, false};
    CHECK(pack(std::span<const double>(in), spec) == in);
  }

  SUBCASE("two-rank column scatter sends the far column") {
    // local rows [a b; c d]; destination 1 gets [b, d]
    const std::vector<double> in = {1 /*a*/, 2 /*b*/, 3 /*c*/, 4 /*d*/};
    TransposeSpec spec{1, 2, 2, 1, block_map(2, 2), ScatterDim::Cols,
                       GatherDim::Cols, false};
    auto out = pack(std::span<const double>(in), spec);
    CHECK(out == std::vector<double>{1, 3, 2, 4});
  }

  SUBCASE("batched sections equal a reference gather loop") {
    // batch=2 blocks of 2x3 scalar super-elements over 3 ranks
    const std::int64_t batch = 2, rows = 2, cols = 3;
    auto in = iota_doubles(batch * rows * cols);
    const BlockMap blocks = block_map(cols, 3);
    TransposeSpec spec{batch, rows, cols, 1, blocks, ScatterDim::Cols,
                       GatherDim::Cols, false};
    auto out = pack(std::span<const double>(in), spec);
    std::vector<double> want;
    for (int q = 0; q < 3; ++q) {
      for (std::int64_t b = 0; b < batch; ++b) {
        for (std::int64_t r = 0; r < rows; ++r) {
          for (std::int64_t c = blocks.offsets[q];
               c < blocks.offsets[q] + blocks.counts[q]; ++c) {
            want.push_back(in[(b * rows + r) * cols + c]);
          }
        }
      }
    }
    CHECK(out == want);
  }

  SUBCASE("row scatter splits contiguous row blocks") {
    auto in = iota_doubles(12);  // [batch=1][rows=4][cols=3]
    TransposeSpec spec{1, 4, 3, 1, block_map(4, 2), ScatterDim::Rows,
                       GatherDim::Cols, false};
    auto out = pack(std::span<const double>(in), spec);
    CHECK(out == in);  // contiguous split preserves order
  }

  SUBCASE("transposed sections order the block outermost") {
    // [rows=2][cols=2]: destination sections become [col][row]
    const std::vector<double> in = {1, 2, 3, 4};
    TransposeSpec spec{1, 2, 2, 1, block_map(2, 2), ScatterDim::Cols,
                       GatherDim::Cols, true};
    auto out = pack(std::span<const double>(in), spec);
    CHECK(out == std::vector<double>{1, 3, 2, 4});  // cols of width 1 each
    TransposeSpec wide{1, 2, 4, 1, block_map(4, 2), ScatterDim::Cols,
                       GatherDim::Cols, true};
    auto in8 = iota_doubles(8);  // rows [1 2 3 4; 5 6 7 8]
    auto out8 = pack(std::span<const double>(in8), wide);
    CHECK(out8 == std::vector<double>{1, 5, 2, 6, 3, 7, 4, 8});
  }

  SUBCASE("count mismatch") {
    auto in = iota_doubles(5);
    TransposeSpec spec{1, 2, 2, 1, block_map(2, 2), ScatterDim::Cols,
                       GatherDim::Cols, false};
    CHECK_THROWS_WITH_AS(pack(std::span<const double>(in), spec),
                         doctest::Contains("CountMismatch"), Error);
  }
}

TEST_CASE("unpack") {
  SUBCASE("single source is the identity") {
    auto in = iota_doubles(6);
    TransposeSpec spec{1, 2, 3, 1, block_map(3, 1), ScatterDim::Cols,
                       GatherDim::Cols, false};
    CHECK(unpack(std::span<const double>(in), spec) == in);
  }

  SUBCASE("unpack inverts pack for a shared view") {
    for (int q : {1, 2, 3, 4}) {
      auto in = iota_doubles(24);
      TransposeSpec spec{2, 3, 4, 1, block_map(4, q), ScatterDim::Cols,
                         GatherDim::Cols, false};
      auto packed = pack(std::span<const double>(in), spec);
      CHECK(unpack(std::span<const double>(packed), spec) == in);
    }
  }

  SUBCASE("row-gather places blocks at row offsets") {
    // pieces: q0 = rows {0,1}, q1 = row {2}; cols=2
    const std::vector<double> in = {1, 2, 3, 4, 5, 6};
    TransposeSpec spec{1, 3, 2, 1, block_map(3, 2), ScatterDim::Cols,
                       GatherDim::Rows, false};
    CHECK(unpack(std::span<const double>(in), spec) == in);
  }

  SUBCASE("leftover bytes are rejected") {
    auto in = iota_doubles(7);
    TransposeSpec spec{1, 2, 3, 1, block_map(3, 1), ScatterDim::Cols,
                       GatherDim::Cols, false};
    CHECK_THROWS_WITH_AS(unpack(std::span<const double>(in), spec),
                         doctest::Contains("CountMismatch"), Error);
  }
}

TEST_CASE("local_transpose") {
  SUBCASE("1x1 identity") {
    const std::vector<double> in = {42};
    CHECK(local_transpose(std::span<const double>(in), 1, 1, 1) == in);
  }

  SUBCASE("textbook 2x3") {
    const std::vector<double> in = {1, 2, 3, 4, 5, 6};
    CHECK(local_transpose(std::span<const double>(in), 2, 3, 1) ==
          std::vector<double>{1, 4, 2, 5, 3, 6});
  }

  SUBCASE("super-elements move intact") {
    const std::int64_t rows = 2, cols = 2, s = 3;
    auto in = iota_doubles(rows * cols * s);
    auto out = local_transpose(std::span<const double>(in), rows, cols, s);
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) {
        for (std::int64_t k = 0; k < s; ++k) {
          CHECK(out[(c * rows + r) * s + k] == in[(r * cols + c) * s + k]);
        }
      }
    }
  }

  SUBCASE("length mismatch") {
    const std::vector<double> in = {1, 2, 3};
    CHECK_THROWS_WITH_AS(local_transpose(std::span<const double>(in), 2, 2, 1),
                         doctest::Contains("LengthMismatch"), Error);
  }
}

TEST_CASE("all_to_all") {
  SUBCASE("single rank copies") {
    auto result = spawn_world(1, [](Comm& comm) {
      const std::vector<double> send = {1, 2, 3};
      return all_to_all(comm, std::span<const double>(send), {3}, {3});
    });
    CHECK(result[0] == std::vector<double>{1, 2, 3});
  }

  SUBCASE("identity pattern: rank j receives 0..,1..,2..") {
    const int k = 3;
    auto results = spawn_world(3, [&](Comm& comm) {
      std::vector<double> send(3 * k, static_cast<double>(comm.rank()));
      const std::vector<std::int64_t> counts = {k, k, k};
      return all_to_all(comm, std::span<const double>(send), counts, counts);
    });
    for (int j = 0; j < 3; ++j) {
      std::vector<double> want;
      for (int src = 0; src < 3; ++src) {
        want.insert(want.end(), k, static_cast<double>(src));
      }
      CHECK(results[j] == want);
    }
  }

  SUBCASE("uneven ceil-block counts deliver matching sections") {
    const BlockMap map = block_map(10, 4);  // [3,3,3,1]
    auto results = spawn_world(4, [&](Comm& comm) {
      std::vector<double> send;
      std::vector<std::int64_t> send_counts(4), recv_counts(4);
      for (int q = 0; q < 4; ++q) {
        send_counts[q] = map.counts[q];
        recv_counts[q] = map.counts[comm.rank()];
        for (int i = 0; i < map.counts[q]; ++i) {
          send.push_back(comm.rank() * 100 + q * 10 + i);
        }
      }
      return all_to_all(comm, std::span<const double>(send), send_counts,
                        recv_counts);
    });
    for (int me = 0; me < 4; ++me) {
      REQUIRE(static_cast<std::int64_t>(results[me].size()) ==
              4 * map.counts[me]);
      std::size_t at = 0;
      for (int src = 0; src < 4; ++src) {
        for (int i = 0; i < map.counts[me]; ++i) {
          CHECK(results[me][at++] == src * 100 + me * 10 + i);
        }
      }
    }
  }
}

TEST_CASE("pipelined_all_to_all") {
  SUBCASE("single rank: fused self copy, identity result") {
    auto result = spawn_world(1, [](Comm& comm) {
      const std::vector<double> send = {5, 6, 7};
      StagingArena arena(1024, 2);
      return pipelined_all_to_all(comm, std::span<const double>(send), {3}, {3},
                                  arena, rotation_schedule(0, 1));
    });
    CHECK(result[0] == std::vector<double>{5, 6, 7});
  }

  SUBCASE("needs two staging buffers") {
    CHECK_THROWS_WITH_AS(
        spawn_world(2,
                    [](Comm& comm) {
                      const std::vector<double> send = {1.0, 2.0};
                      StagingArena arena(1024, 1);
                      return pipelined_all_to_all(
                          comm, std::span<const double>(send), {1, 1}, {1, 1},
                          arena, rotation_schedule(comm.rank(), 2));
                    }),
        doctest::Contains("ArenaExhausted"), Error);
  }

  SUBCASE("byte-identical to the blocking path over randomized cases") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
      const int p = 2 + static_cast<int>(rng() % 3);  // 2..4
      const int chunks = 1 + static_cast<int>(rng() % 3);
      // symmetric counts: count(src->dst) must equal what dst expects of src;
      // build a full matrix deterministically from the trial seed
      std::vector<std::vector<std::int64_t>> matrix(p,
                                                    std::vector<std::int64_t>(p));
      for (int s = 0; s < p; ++s) {
        for (int d = 0; d < p; ++d) matrix[s][d] = rng() % 5;  // may be zero
      }
      const unsigned seed = rng();
      auto run = [&](bool pipelined) {
        return spawn_world(p, [&, pipelined](Comm& comm) {
          std::vector<std::int64_t> send_counts(p), recv_counts(p);
          std::int64_t total = 0;
          for (int q = 0; q < p; ++q) {
            send_counts[q] = matrix[comm.rank()][q];
            recv_counts[q] = matrix[q][comm.rank()];
            total += send_counts[q];
          }
          auto send = random_complex(total, seed + comm.rank());
          if (!pipelined) {
            return all_to_all(comm, std::span<const cxd>(send), send_counts,
                              recv_counts);
          }
          StagingArena arena(4096, 2 + static_cast<int>(seed % 2));
          return pipelined_all_to_all(comm, std::span<const cxd>(send),
                                      send_counts, recv_counts, arena,
                                      rotation_schedule(comm.rank(), p, chunks));
        });
      };
      auto blocking = run(false);
      auto pipelined = run(true);
      for (int r = 0; r < p; ++r) {
        REQUIRE(blocking[r].size() == pipelined[r].size());
        CHECK(std::memcmp(blocking[r].data(), pipelined[r].data(),
                          blocking[r].size() * sizeof(cxd)) == 0);
      }
    }
  }
}

namespace {

// Virtual makespan of one symmetric exchange of `elems` complex doubles per
// section under the given staging rate.
double exchange_makespan(int p, std::int64_t elems, double staging_inv_bw,
                         bool pipelined, int chunks = 1) {
  WorldOptions options;
  options.cost_model = CostModel{1e-6, 1e-9, staging_inv_bw, 0.0, 0.0};
  auto times = spawn_world(
      p,
      [&](Comm& comm) {
        std::vector<std::int64_t> counts(p, elems);
        std::vector<cxd> send(elems * p, cxd(comm.rank(), 1));
        if (pipelined) {
          StagingArena arena(elems * sizeof(cxd) + 64, 2);
          pipelined_all_to_all(comm, std::span<const cxd>(send), counts, counts,
                               arena, rotation_schedule(comm.rank(), p, chunks));
        } else {
          staged_all_to_all(comm, std::span<const cxd>(send), counts, counts);
        }
        return comm.clock()->now();
      },
      options);
  double makespan = 0;
  for (double t : times) makespan = std::max(makespan, t);
  return makespan;
}

}  // namespace

TEST_CASE("overlap: pipelined beats stage-all-then-exchange") {
  for (int p : {2, 4, 8}) {
    double previous_gap = 0.0;
    for (double c : {5e-10, 2e-9, 8e-9}) {
      const double staged = exchange_makespan(p, 1 << 10, c, false);
      const double pipelined = exchange_makespan(p, 1 << 10, c, true);
      CHECK(pipelined < staged);
      const double gap = staged - pipelined;
      CHECK(gap >= previous_gap - 1e-15);
      previous_gap = gap;
    }
  }
}

TEST_CASE("global_transpose") {
  const auto value_at = [](std::int64_t flat, std::span<const std::int64_t>) {
    return cxd(static_cast<double>(flat), -0.5 * static_cast<double>(flat));
  };

  SUBCASE("trivial grid is the identity") {
    auto result = spawn_world(1, [&](Comm& comm) {
      const GlobalDims dims{4, 4, 4};
      auto from = spatial_layout(dims, ProcessGrid{1, 1}, TransformKind::C2C);
      auto to = from;
      to.axis_of_grid = {0, 2};
      auto t = DistTensor<double>::zeros(from, comm.rank());
      fill_from_global(t, value_at);
      auto moved = global_transpose(comm, t, to, false);
      return gather_global_complex(comm, moved);
    });
    for (std::int64_t i = 0; i < 64; ++i) {
      CHECK(result[0][i] == value_at(i, {}));
    }
  }

  SUBCASE("content is conserved across a pencil step") {
    for (bool pipelined : {false, true}) {
      auto result = spawn_world(4, [&](Comm& comm) {
        const GlobalDims dims{4, 4, 4};
        auto from = spatial_layout(dims, ProcessGrid{2, 2}, TransformKind::C2C);
        auto to = from;
        to.axis_of_grid = {0, 2};  // gather axis 1, scatter axis 2
        auto t = DistTensor<double>::zeros(from, comm.rank());
        fill_from_global(t, value_at);
        auto moved = global_transpose(comm, t, to, pipelined);
        return gather_global_complex(comm, moved);
      });
      for (std::int64_t i = 0; i < 64; ++i) {
        CHECK(result[0][i] == value_at(i, {}));
      }
    }
  }

  SUBCASE("grid choice does not change the assembled result") {
    auto run = [&](ProcessGrid grid) {
      return spawn_world(8, [&](Comm& comm) {
        const GlobalDims dims{8, 8, 8};
        auto from = spatial_layout(dims, grid, TransformKind::C2C);
        auto to = from;
        to.axis_of_grid = {0, 2};
        auto t = DistTensor<double>::zeros(from, comm.rank());
        fill_from_global(t, value_at);
        auto moved = global_transpose(comm, t, to, false);
        return gather_global_complex(comm, moved);
      });
    };
    auto a = run(ProcessGrid{2, 4});
    auto b = run(ProcessGrid{4, 2});
    CHECK(a[0] == b[0]);
    for (std::int64_t i = 0; i < 512; ++i) CHECK(a[0][i] == value_at(i, {}));
  }

  SUBCASE("content conservation sweep over small shapes and grids") {
    const std::vector<GlobalDims> shapes = {GlobalDims{4, 4, 4},
                                            GlobalDims{5, 3, 7},
                                            GlobalDims{2, 6, 4}};
    const std::vector<ProcessGrid> grids = {
        ProcessGrid{1, 1}, ProcessGrid{2, 2}, ProcessGrid{2, 3},
        ProcessGrid{4, 2}, ProcessGrid{1, 8}};
    for (const auto& dims : shapes) {
      for (const auto& grid : grids) {
        auto result = spawn_world(grid.size(), [&](Comm& comm) {
          auto from = spatial_layout(dims, grid, TransformKind::C2C);
          auto to = from;
          to.axis_of_grid = {0, 2};
          auto t = DistTensor<double>::zeros(from, comm.rank());
          fill_from_global(t, value_at);
          auto step2 = global_transpose(comm, t, to, false);
          // second hop: gather axis 0, scatter axis 1 (frequency layout)
          auto freq = to;
          freq.axis_of_grid = {1, 2};
          auto step4 = global_transpose(comm, step2, freq, false);
          return gather_global_complex(comm, step4);
        });
        for (std::int64_t i = 0; i < dims.total(); ++i) {
          CHECK(result[0][i] == value_at(i, {}));
        }
      }
    }
  }

  SUBCASE("incompatible layouts are rejected") {
    auto thrown = spawn_world(1, [&](Comm& comm) -> std::string {
      const GlobalDims dims{4, 4, 4};
      auto from = spatial_layout(dims, ProcessGrid{1, 1}, TransformKind::C2C);
      auto t = DistTensor<double>::zeros(from, comm.rank());
      try {
        global_transpose(comm, t, from, false);
      } catch (const Error& e) {
        return e.what();
      }
      return "";
    });
    CHECK(thrown[0].find("IncompatibleLayouts") != std::string::npos);
  }
}

TEST_CASE("transposed final exchange matches the fixup contract") {
  // gather axis 0 over the column communicator, scatter axis 1; the unpacked
  // buffer is [my block(1)][N0][s] until the local transpose restores xyz.
  auto result = spawn_world(2, [](Comm& comm) {
    const GlobalDims dims{4, 4, 2};
    Distribution from = spatial_layout(dims, ProcessGrid{2}, TransformKind::C2C);
    Distribution to = from;
    to.axis_of_grid = {1};
    auto t = DistTensor<double>::zeros(from, comm.rank());
    fill_from_global(t, [](std::int64_t flat, std::span<const std::int64_t>) {
      return cxd(static_cast<double>(flat), 0.0);
    });
    const auto step = make_transpose_step(from, to, comm.rank(), true);
    auto axis_comm = split_grid_axis(comm, from.grid, step.grid_axis);
    StagingArena arena(1 << 16, 2);
    auto raw = run_transpose_step(*axis_comm, std::span<const cxd>(t.cplx), step,
                                  ExchangePath::Blocking, &arena);
    REQUIRE(step.needs_fixup);
    auto fixed = local_transpose(std::span<const cxd>(raw), step.fix_rows,
                                 step.fix_cols, step.fix_super);
    DistTensor<double> out;
    out.dist = to;
    out.rank = comm.rank();
    out.cplx = std::move(fixed);
    return gather_global_complex(comm, out);
  });
  for (std::int64_t i = 0; i < 32; ++i) {
    CHECK(result[0][i] == cxd(static_cast<double>(i), 0.0));
  }
}
