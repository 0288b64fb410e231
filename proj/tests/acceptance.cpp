// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: prints one pass/fail line per criterion and exits
// nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dfft/bench.hpp"
#include "dfft/plan.hpp"
#include "dfft/spectral.hpp"

using namespace dfft;
using namespace dfft::transport;
using cxd = cx<double>;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double unit_from_hash(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0;
}

cxd complex_field(std::int64_t flat) {
  return cxd(unit_from_hash(2 * flat + 1), unit_from_hash(2 * flat + 2));
}

cxd real_field(std::int64_t flat) {
  return cxd(unit_from_hash(3 * flat + 1), 0.0);
}

double rel_err(const std::vector<cxd>& got, const std::vector<cxd>& want) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += std::norm(got[i] - want[i]);
    den += std::norm(want[i]);
  }
  return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

enum class Decomp { Slab, Pencil, General };

template <class T>
Plan<T> build_plan(Decomp decomp, const GlobalDims& dims,
                   const ProcessGrid& grid, TransformKind kind,
                   Direction dir) {
  switch (decomp) {
    case Decomp::Slab:
      return plan_slab<T>(dims, grid.size(), kind, dir);
    case Decomp::Pencil:
      return plan_pencil<T>(dims, grid, kind, dir);
    case Decomp::General:
      return plan_general<T>(dims, grid, kind, dir);
  }
  raise(ErrorCode::ConfigInvalid, "unreachable");
}

/// Per-shape oracle references, computed once and shared across all grids
/// and decompositions of the sweep.
struct ShapeOracle {
  std::vector<cxd> c2c_forward;
  std::vector<cxd> r2c_forward;  // truncated last axis
  double c2c_input_energy = 0.0;
};

ShapeOracle make_shape_oracle(const GlobalDims& dims) {
  ShapeOracle oracle;
  const std::int64_t total = dims.total();
  std::vector<cxd> cx_in(total), re_in(total);
  for (std::int64_t i = 0; i < total; ++i) {
    cx_in[i] = complex_field(i);
    re_in[i] = real_field(i);
    oracle.c2c_input_energy += std::norm(cx_in[i]);
  }
  oracle.c2c_forward = dft_oracle<double>(std::span<const cxd>(cx_in),
                                          dims.extent, Direction::Forward);
  auto full = dft_oracle<double>(std::span<const cxd>(re_in), dims.extent,
                                 Direction::Forward);
  const std::int64_t n_last = dims.extent.back();
  const std::int64_t n_half = n_last / 2 + 1;
  oracle.r2c_forward.reserve(total / n_last * n_half);
  for (std::int64_t row = 0; row < total / n_last; ++row) {
    for (std::int64_t k = 0; k < n_half; ++k) {
      oracle.r2c_forward.push_back(full[row * n_last + k]);
    }
  }
  return oracle;
}

/// Errors collected from one (shape, grid, decomp) configuration.
struct SweepErrors {
  double oracle_c2c = 0, oracle_r2c = 0;
  double roundtrip_c2c = 0, roundtrip_r2c = 0;
  double parseval = 0;
};

SweepErrors run_sweep_config(Decomp decomp, const GlobalDims& dims,
                             const ProcessGrid& grid,
                             const ShapeOracle& oracle) {
  SweepErrors errs;
  auto gathered = spawn_world(grid.size(), [&](Comm& comm) {
    struct RankOut {
      std::vector<cxd> c2c, r2c;
      double rt_c2c = 0, rt_r2c = 0;
    } out;

    auto fwd_c = build_plan<double>(decomp, dims, grid, TransformKind::C2C,
                                    Direction::Forward);
    auto bwd_c = build_plan<double>(decomp, dims, grid, TransformKind::C2C,
                                    Direction::Backward);
    auto ctx = make_context(fwd_c, comm);

    auto x = DistTensor<double>::zeros(fwd_c.input, comm.rank());
    fill_from_global(x, [](std::int64_t flat, std::span<const std::int64_t>) {
      return complex_field(flat);
    });
    auto spectrum = execute(fwd_c, x, ctx);
    out.c2c = gather_global_complex(comm, spectrum);
    auto back = execute(bwd_c, spectrum, ctx);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < back.cplx.size(); ++i) {
      num += std::norm(back.cplx[i] - x.cplx[i]);
      den += std::norm(x.cplx[i]);
    }
    out.rt_c2c = den == 0 ? 0.0 : std::sqrt(num / den);

    auto fwd_r = build_plan<double>(decomp, dims, grid, TransformKind::R2C,
                                    Direction::Forward);
    auto bwd_r = build_plan<double>(decomp, dims, grid, TransformKind::C2R,
                                    Direction::Backward);
    auto xr = DistTensor<double>::zeros(fwd_r.input, comm.rank());
    fill_from_global(xr, [](std::int64_t flat, std::span<const std::int64_t>) {
      return real_field(flat);
    });
    auto half = execute(fwd_r, xr, ctx);
    out.r2c = gather_global_complex(comm, half);
    auto back_r = execute(bwd_r, half, ctx);
    num = den = 0;
    for (std::size_t i = 0; i < back_r.real.size(); ++i) {
      num += (back_r.real[i] - xr.real[i]) * (back_r.real[i] - xr.real[i]);
      den += xr.real[i] * xr.real[i];
    }
    out.rt_r2c = den == 0 ? 0.0 : std::sqrt(num / den);
    return out;
  });

  errs.oracle_c2c = rel_err(gathered[0].c2c, oracle.c2c_forward);
  errs.oracle_r2c = rel_err(gathered[0].r2c, oracle.r2c_forward);
  for (const auto& r : gathered) {
    errs.roundtrip_c2c = std::max(errs.roundtrip_c2c, r.rt_c2c);
    errs.roundtrip_r2c = std::max(errs.roundtrip_r2c, r.rt_r2c);
  }
  double freq_energy = 0;
  for (const auto& v : gathered[0].c2c) freq_energy += std::norm(v);
  errs.parseval =
      std::abs(dims.total() * oracle.c2c_input_energy - freq_energy) /
      freq_energy;
  return errs;
}

std::vector<GlobalDims> sweep_shapes() {
  const std::vector<std::int64_t> axes = {2, 3, 4, 5, 6, 8};
  std::vector<GlobalDims> shapes;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    for (std::size_t b = a; b < axes.size(); ++b) {
      for (std::size_t c = b; c < axes.size(); ++c) {
        shapes.push_back(GlobalDims{axes[a], axes[b], axes[c]});
      }
    }
  }
  // axis order matters: add a few decreasing/mixed permutations
  shapes.push_back(GlobalDims{8, 2, 4});
  shapes.push_back(GlobalDims{6, 4, 2});
  shapes.push_back(GlobalDims{5, 8, 3});
  shapes.push_back(GlobalDims{8, 6, 4, 4});  // the 4-axis case
  return shapes;
}

std::vector<ProcessGrid> grids_for(std::size_t grid_axes, int max_p) {
  std::vector<ProcessGrid> grids;
  std::function<void(std::vector<int>&, int)> rec =
      [&](std::vector<int>& shape, int product) {
        if (shape.size() == grid_axes) {
          grids.push_back(ProcessGrid{shape});
          return;
        }
        for (int f = 1; f * product <= max_p; ++f) {
          shape.push_back(f);
          rec(shape, product * f);
          shape.pop_back();
        }
      };
  std::vector<int> shape;
  rec(shape, 1);
  return grids;
}

bool grid_legal(const GlobalDims& dims, const ProcessGrid& grid,
                TransformKind kind) {
  try {
    dfft::detail::check_rank_occupancy(dims, grid, kind);
  } catch (const Error&) {
    return false;
  }
  return true;
}

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// criteria 1-3: the sweep
void run_sweep(std::vector<Criterion>& out) {
  double worst_oracle = 0, worst_rt = 0, worst_parseval = 0;
  int configs = 0, skipped = 0;
  int shape_count = 0;

  for (const GlobalDims& dims : sweep_shapes()) {
    ++shape_count;
    const ShapeOracle oracle = make_shape_oracle(dims);

    // slab: every P up to min(8, N0)
    for (int p = 1; p <= std::min<std::int64_t>(8, dims[0]); ++p) {
      auto errs = run_sweep_config(Decomp::Slab, dims, ProcessGrid{p}, oracle);
      worst_oracle = std::max({worst_oracle, errs.oracle_c2c, errs.oracle_r2c});
      worst_rt = std::max({worst_rt, errs.roundtrip_c2c, errs.roundtrip_r2c});
      worst_parseval = std::max(worst_parseval, errs.parseval);
      ++configs;
    }

    // pencil (3-axis shapes) and general: every grid with product <= 8
    std::vector<Decomp> decomps;
    if (dims.ndim() == 3) decomps = {Decomp::Pencil, Decomp::General};
    else decomps = {Decomp::General};
    for (Decomp decomp : decomps) {
      for (const ProcessGrid& grid : grids_for(dims.ndim() - 1, 8)) {
        if (!grid_legal(dims, grid, TransformKind::C2C) ||
            !grid_legal(dims, grid, TransformKind::R2C)) {
          ++skipped;
          continue;
        }
        auto errs = run_sweep_config(decomp, dims, grid, oracle);
        worst_oracle =
            std::max({worst_oracle, errs.oracle_c2c, errs.oracle_r2c});
        worst_rt = std::max({worst_rt, errs.roundtrip_c2c, errs.roundtrip_r2c});
        worst_parseval = std::max(worst_parseval, errs.parseval);
        ++configs;
      }
    }
  }

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d shapes, %d configs (%d illegal grids skipped), max rel "
                "err %.2e",
                shape_count, configs, skipped, worst_oracle);
  out.push_back({1, "oracle equivalence sweep (C2C+R2C, slab/pencil/general)",
                 worst_oracle <= 1e-10 && shape_count >= 40, detail});
  std::snprintf(detail, sizeof(detail), "max rel err %.2e over %d configs",
                worst_rt, configs);
  out.push_back({2, "round trips (C2C inverse, R2C->C2R incl. odd axes)",
                 worst_rt <= 1e-12, detail});
  std::snprintf(detail, sizeof(detail), "max rel defect %.2e", worst_parseval);
  out.push_back({3, "Parseval identity over the C2C sweep",
                 worst_parseval <= 1e-10, detail});
}

// ---------------------------------------------------------------------------
// criterion 4: pipelined byte equality
void run_pipelined_equality(std::vector<Criterion>& out) {
  std::mt19937 rng(4242);
  int trials = 0;
  bool ok = true;
  while (trials < 100 && ok) {
    const int p = 2 + static_cast<int>(rng() % 7);  // 2..8
    const int chunks = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<std::int64_t>> matrix(p, std::vector<std::int64_t>(p));
    for (int s = 0; s < p; ++s) {
      for (int d = 0; d < p; ++d) matrix[s][d] = rng() % 6;
    }
    const unsigned seed = rng();
    auto run_one = [&](bool pipelined) {
      return spawn_world(p, [&, pipelined](Comm& comm) {
        std::vector<std::int64_t> send_counts(p), recv_counts(p);
        std::int64_t total = 0;
        for (int q = 0; q < p; ++q) {
          send_counts[q] = matrix[comm.rank()][q];
          recv_counts[q] = matrix[q][comm.rank()];
          total += send_counts[q];
        }
        std::vector<cxd> send(total);
        for (std::int64_t i = 0; i < total; ++i) {
          send[i] = cxd(unit_from_hash(seed + comm.rank() * 7919 + 2 * i),
                        unit_from_hash(seed + comm.rank() * 7919 + 2 * i + 1));
        }
        if (!pipelined) {
          return all_to_all(comm, std::span<const cxd>(send), send_counts,
                            recv_counts);
        }
        StagingArena arena(1 << 12, 2 + static_cast<int>(seed % 3));
        return pipelined_all_to_all(comm, std::span<const cxd>(send),
                                    send_counts, recv_counts, arena,
                                    rotation_schedule(comm.rank(), p, chunks));
      });
    };
    auto blocking = run_one(false);
    auto pipelined = run_one(true);
    for (int r = 0; r < p; ++r) {
      ok = ok && blocking[r].size() == pipelined[r].size() &&
           std::memcmp(blocking[r].data(), pipelined[r].data(),
                       blocking[r].size() * sizeof(cxd)) == 0;
    }
    ++trials;
  }
  out.push_back({4, "pipelined all-to-all is byte-identical to blocking",
                 ok && trials == 100,
                 std::to_string(trials) + " randomized cases, P in 2..8"});
}

// ---------------------------------------------------------------------------
// criterion 5: overlap benefit
double makespan(int p, std::int64_t elems, double staging_inv_bw,
                bool pipelined) {
  WorldOptions options;
  options.cost_model = CostModel{1e-6, 1e-9, staging_inv_bw, 0.0, 0.0};
  auto times = spawn_world(
      p,
      [&](Comm& comm) {
        std::vector<std::int64_t> counts(p, elems);
        std::vector<cxd> send(elems * p, cxd(comm.rank(), 1));
        if (pipelined) {
          StagingArena arena(elems * sizeof(cxd) + 64, 2);
          pipelined_all_to_all(comm, std::span<const cxd>(send), counts,
                               counts, arena,
                               rotation_schedule(comm.rank(), p));
        } else {
          staged_all_to_all(comm, std::span<const cxd>(send), counts, counts);
        }
        return comm.clock()->now();
      },
      options);
  double m = 0;
  for (double t : times) m = std::max(m, t);
  return m;
}

void run_overlap(std::vector<Criterion>& out) {
  bool strict = true, monotone = true;
  double min_gain = 1e300;
  for (int p : {2, 4, 8}) {
    double previous_gap = 0.0;
    for (double c : {5e-10, 2e-9, 8e-9}) {
      const double staged = makespan(p, 1 << 10, c, false);
      const double piped = makespan(p, 1 << 10, c, true);
      strict = strict && piped < staged;
      const double gap = staged - piped;
      monotone = monotone && gap >= previous_gap - 1e-15;
      min_gain = std::min(min_gain, gap / staged);
      previous_gap = gap;
    }
  }
  char detail[120];
  std::snprintf(detail, sizeof(detail),
                "strictly faster at P in {2,4,8}, min gain %.1f%%, gap "
                "non-decreasing in staging cost",
                100.0 * min_gain);
  out.push_back({5, "pipelined exchange beats stage-all-then-exchange",
                 strict && monotone, detail});
}

// ---------------------------------------------------------------------------
// criterion 6: slab constraint vs pencil
void run_slab_constraint(std::vector<Criterion>& out) {
  const GlobalDims dims{4, 6, 8};
  bool slab_rejected = false;
  try {
    plan_slab<double>(dims, 5, TransformKind::C2C, Direction::Forward);
  } catch (const Error& e) {
    slab_rejected = e.code() == ErrorCode::SlabTooManyRanks;
  }

  bench::RunConfig cfg;
  cfg.dims = dims;
  cfg.np = 5;
  cfg.decomp = bench::DecompChoice::Pencil;
  cfg.reps = 1;
  cfg.warmup = 0;
  auto report = bench::run(cfg);
  const bool pencil_ok = report.verify_status == bench::VerifyStatus::Passed;
  out.push_back({6, "slab rejects P > N0 while pencil succeeds",
                 slab_rejected && pencil_ok,
                 "P=5 on 4x6x8: SlabTooManyRanks; pencil grid " +
                     std::to_string(report.config.grid.shape[0]) + "x" +
                     std::to_string(report.config.grid.shape[1]) +
                     " verified"});
}

// ---------------------------------------------------------------------------
// criterion 7: layout contract
void run_layout_contract(std::vector<Criterion>& out) {
  const GlobalDims dims{8, 4, 6};
  const ProcessGrid grid{2, 2};
  bool ok = true;
  std::string note = "structural equality";
  for (TransformKind kind : {TransformKind::C2C, TransformKind::R2C}) {
    auto plan = plan_pencil<double>(dims, grid, kind, Direction::Forward);
    ok = ok && plan.output == frequency_layout(dims, grid, kind);
    ok = ok && plan.output.axis_of_grid == std::vector<int>{1, 2};
    ok = ok && plan.output.all_hatted();
  }
  // spot indexing: execute and compare owned entries against the oracle at
  // their xyz coordinates
  const std::int64_t total = dims.total();
  std::vector<cxd> input(total);
  for (std::int64_t i = 0; i < total; ++i) input[i] = complex_field(i);
  auto oracle = dft_oracle<double>(std::span<const cxd>(input), dims.extent,
                                   Direction::Forward);
  auto spot = spawn_world(4, [&](Comm& comm) {
    auto plan = plan_pencil<double>(dims, grid, TransformKind::C2C,
                                    Direction::Forward);
    auto ctx = make_context(plan, comm);
    auto x = DistTensor<double>::zeros(plan.input, comm.rank());
    fill_from_global(x, [](std::int64_t flat, std::span<const std::int64_t>) {
      return complex_field(flat);
    });
    auto y = execute(plan, x, ctx);
    // probe a handful of owned coordinates through local_index
    double err = 0;
    const LocalExtents ext = y.dist.extents_of(comm.rank());
    for (std::int64_t probe = 0; probe < 5; ++probe) {
      std::vector<std::int64_t> coord(3);
      std::int64_t flat = 0;
      for (int a = 0; a < 3; ++a) {
        coord[a] = ext.axes[a].offset +
                   (probe * (a + 3)) % std::max<std::int64_t>(1, ext.axes[a].length);
        flat = flat * dims[a] + coord[a];
      }
      auto [owner, offset] = local_index(y.dist, coord);
      if (owner != comm.rank()) return 1e9;
      err = std::max(err, std::abs(y.cplx[offset] - oracle[flat]));
    }
    return err;
  });
  for (double e : spot) ok = ok && e < 1e-9;
  out.push_back({7, "forward output is the hatted xyz frequency layout", ok,
                 note + " + per-rank spot indexing against the oracle"});
}

// ---------------------------------------------------------------------------
// criterion 8: grid independence at P=8
void run_grid_independence(std::vector<Criterion>& out) {
  const GlobalDims dims{8, 8, 8};
  auto run_grid = [&](const ProcessGrid& grid) {
    auto results = spawn_world(8, [&](Comm& comm) {
      auto plan = plan_pencil<double>(dims, grid, TransformKind::C2C,
                                      Direction::Forward);
      auto ctx = make_context(plan, comm);
      auto x = DistTensor<double>::zeros(plan.input, comm.rank());
      fill_from_global(x, [](std::int64_t flat, std::span<const std::int64_t>) {
        return complex_field(flat);
      });
      return gather_global_complex(comm, execute(plan, x, ctx));
    });
    return results[0];
  };
  const auto baseline = run_grid(ProcessGrid{8, 1});
  double worst = 0;
  for (const ProcessGrid& grid :
       {ProcessGrid{4, 2}, ProcessGrid{2, 4}, ProcessGrid{1, 8}}) {
    worst = std::max(worst, rel_err(run_grid(grid), baseline));
  }
  char detail[80];
  std::snprintf(detail, sizeof(detail),
                "grids 8x1,4x2,2x4,1x8 agree to %.2e", worst);
  out.push_back({8, "grid independence across factorizations of P=8",
                 worst <= 1e-12, detail});
}

// ---------------------------------------------------------------------------
// criterion 9: the 4-D transform
void run_4d(std::vector<Criterion>& out) {
  const GlobalDims dims{8, 6, 4, 4};
  std::vector<cxd> input(dims.total());
  for (std::int64_t i = 0; i < dims.total(); ++i) input[i] = complex_field(i);
  auto oracle = dft_oracle<double>(std::span<const cxd>(input), dims.extent,
                                   Direction::Forward);
  auto results = spawn_world(8, [&](Comm& comm) {
    auto plan = plan_general<double>(dims, ProcessGrid{2, 2, 2},
                                     TransformKind::C2C, Direction::Forward);
    auto ctx = make_context(plan, comm);
    auto x = DistTensor<double>::zeros(plan.input, comm.rank());
    fill_from_global(x, [](std::int64_t flat, std::span<const std::int64_t>) {
      return complex_field(flat);
    });
    return gather_global_complex(comm, execute(plan, x, ctx));
  });
  const double err = rel_err(results[0], oracle);
  char detail[80];
  std::snprintf(detail, sizeof(detail),
                "8x6x4x4 on a 2x2x2 grid, rel err %.2e", err);
  out.push_back({9, "4-D transform via the general decomposition",
                 err <= 1e-10, detail});
}

// ---------------------------------------------------------------------------
// criterion 10: cost-model strong scaling + T_FFT topology ratio
void run_cost_model_scaling(std::vector<Criterion>& out) {
  std::vector<double> local_fft;
  for (int p : {1, 2, 4, 8}) {
    bench::RunConfig cfg;
    cfg.dims = GlobalDims{16, 16, 16};
    cfg.np = p;
    cfg.backend = bench::BackendChoice::CostModel;
    cfg.verify = bench::VerifyMode::Off;
    cfg.reps = 1;
    cfg.warmup = 0;
    local_fft.push_back(bench::run(cfg).best.local_fft);
  }
  bool scaling_exact = true;
  for (std::size_t i = 0; i < local_fft.size(); ++i) {
    const double scaled = local_fft[i] * static_cast<double>(1 << i);
    scaling_exact = scaling_exact &&
                    std::abs(scaled - local_fft[0]) <= 1e-12 * local_fft[0];
  }

  bench::ComplexityModel hyper, torus;
  torus.topology = bench::Topology::Torus3d;
  bool ratio_exact = true;
  for (int p : {8, 27, 64, 125}) {
    const auto a = bench::predict_tfft(GlobalDims{16, 16, 16}, p, hyper);
    const auto b = bench::predict_tfft(GlobalDims{16, 16, 16}, p, torus);
    const double want = std::cbrt(static_cast<double>(p));
    ratio_exact =
        ratio_exact && std::abs(b.comm / a.comm - want) <= 1e-15 * want;
  }
  out.push_back({10, "cost-model local FFT scales as 1/P; torus/hypercube "
                     "comm ratio is P^(1/3)",
                 scaling_exact && ratio_exact,
                 "P in {1,2,4,8} exact; ratio exact for cube P"});
}

// ---------------------------------------------------------------------------
// criterion 11: spectral operators
void run_spectral(std::vector<Criterion>& out) {
  auto results = spawn_world(4, [&](Comm& comm) {
    const GlobalDims dims{8, 8, 8};
    auto ctx = make_spectral_context<double>(comm, dims, ProcessGrid{2, 2});

    // eigen-relation on a mixed resolved mode: lap sin(x) cos(2z) = -(1+4)...
    auto mode = DistTensor<double>::zeros(ctx.fwd_r2c.input, comm.rank());
    fill_from_global(mode, [](std::int64_t, std::span<const std::int64_t> c) {
      return cxd(std::sin(kTwoPi * c[0] / 8.0) * std::cos(kTwoPi * 2 * c[2] / 8.0),
                 0);
    });
    auto lap = laplacian(ctx, mode);
    double eigen_err = 0;
    for (std::size_t i = 0; i < lap.real.size(); ++i) {
      eigen_err = std::max(eigen_err,
                           std::abs(lap.real[i] + 5.0 * mode.real[i]));
    }

    // inverse_laplacian o laplacian identity on a zero-mean field
    auto zm = DistTensor<double>::zeros(ctx.fwd_r2c.input, comm.rank());
    fill_from_global(zm, [](std::int64_t, std::span<const std::int64_t> c) {
      return cxd(std::sin(kTwoPi * c[0] / 8.0) +
                     0.5 * std::cos(kTwoPi * 3 * c[1] / 8.0) +
                     0.25 * std::sin(kTwoPi * 2 * (c[2] + c[0]) / 8.0),
                 0);
    });
    auto recovered = inverse_laplacian(ctx, laplacian(ctx, zm));
    double inv_err = 0;
    for (std::size_t i = 0; i < zm.real.size(); ++i) {
      inv_err = std::max(inv_err, std::abs(recovered.real[i] - zm.real[i]));
    }
    return std::pair<double, double>(eigen_err, inv_err);
  });
  double eigen_err = 0, inv_err = 0;
  for (const auto& [e, i] : results) {
    eigen_err = std::max(eigen_err, e);
    inv_err = std::max(inv_err, i);
  }
  char detail[100];
  std::snprintf(detail, sizeof(detail),
                "eigen defect %.2e (tol 1e-10), inverse defect %.2e (tol 1e-9)",
                eigen_err, inv_err);
  out.push_back({11, "spectral operators: eigen-relation and inverse Laplacian",
                 eigen_err <= 1e-10 && inv_err <= 1e-9, detail});
}

// ---------------------------------------------------------------------------
// criterion 12: the operation-count formula
void run_flops(std::vector<Criterion>& out) {
  const double got = bench::flops_estimate(GlobalDims{1024, 1024, 1024});
  const double want = 5.0 * 1073741824.0 * 30.0;
  out.push_back({12, "flops_estimate(1024^3) = 5*2^30*30 exactly",
                 got == want, "got " + std::to_string(got)});
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  run_sweep(results);
  run_pipelined_equality(results);
  run_overlap(results);
  run_slab_constraint(results);
  run_layout_contract(results);
  run_grid_independence(results);
  run_4d(results);
  run_cost_model_scaling(results);
  run_spectral(results);
  run_flops(results);

  int failures = 0;
  for (const auto& c : results) {
    std::printf("[%s] criterion %2d: %s — %s\n", c.pass ? "PASS" : "FAIL",
                c.id, c.name.c_str(), c.detail.c_str());
    failures += c.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}
