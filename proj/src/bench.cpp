// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#include "dfft/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "dfft/plan.hpp"
#include "dfft/simd.hpp"
#include "dfft/tensor_file.hpp"

namespace dfft::bench {
namespace {

using cxd = cx<double>;

double unit_from_hash(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

double flops_estimate(const GlobalDims& dims) {
  std::uint64_t n = 1;
  for (const auto d : dims.extent) n *= static_cast<std::uint64_t>(d);
  if (n <= 1) return 0.0;
  if (std::has_single_bit(n)) {
    const std::uint64_t log2n = static_cast<std::uint64_t>(std::countr_zero(n));
    return static_cast<double>(5 * n * log2n);
  }
  return 5.0 * static_cast<double>(n) * std::log2(static_cast<double>(n));
}

TfftPrediction predict_tfft(const GlobalDims& dims, int ranks,
                            const ComplexityModel& model) {
  if (ranks < 1) raise(ErrorCode::ConfigInvalid, "ranks must be >= 1");
  const double n = static_cast<double>(dims.total());
  const double p = static_cast<double>(ranks);
  TfftPrediction out;
  out.compute = model.compute_constant * n *
                (n > 1 ? std::log2(n) : 0.0) / p;
  if (model.topology == Topology::Hypercube) {
    out.comm = model.comm_constant * n / p;
  } else {
    const double p13 = std::cbrt(p);
    out.comm = model.comm_constant * n / (p13 * p13);
  }
  return out;
}

ProcessGrid auto_grid(int ranks, std::size_t grid_axes) {
  if (ranks < 1) raise(ErrorCode::ConfigInvalid, "ranks must be >= 1");
  std::vector<int> shape;
  int remaining = ranks;
  for (std::size_t a = grid_axes; a > 1; --a) {
    // largest divisor <= the a-th root keeps factors as square as possible
    const double root = std::pow(static_cast<double>(remaining),
                                 1.0 / static_cast<double>(a));
    int best = 1;
    for (int f = 1; f <= static_cast<int>(root + 1e-9); ++f) {
      if (remaining % f == 0) best = f;
    }
    shape.push_back(best);
    remaining /= best;
  }
  shape.push_back(remaining);
  std::sort(shape.begin(), shape.end(), std::greater<>());
  return ProcessGrid{shape};
}

void RunConfig::finalize() {
  if (dims.ndim() < 2) {
    raise(ErrorCode::ConfigInvalid, "need at least two tensor axes");
  }
  for (const auto d : dims.extent) {
    if (d < 1) raise(ErrorCode::ConfigInvalid, "axis lengths must be >= 1");
  }
  const std::size_t grid_axes =
      decomp == DecompChoice::Slab ? 1
      : decomp == DecompChoice::Pencil ? 2
                                       : dims.ndim() - 1;
  if (grid.ndim() == 0) {
    grid = auto_grid(np, grid_axes);
  }
  if (grid.ndim() != grid_axes) {
    raise(ErrorCode::ConfigInvalid,
          "grid arity does not match the decomposition");
  }
  np = grid.size();
  if (decomp == DecompChoice::Pencil && dims.ndim() != 3) {
    raise(ErrorCode::ConfigInvalid, "pencil runs on 3-axis tensors");
  }
  if (reps < 1) raise(ErrorCode::ConfigInvalid, "reps must be >= 1");
  if (warmup < 0) raise(ErrorCode::ConfigInvalid, "warmup must be >= 0");
  if (chunks < 1) raise(ErrorCode::ConfigInvalid, "chunks must be >= 1");
  if (staging_buffers < 1) {
    raise(ErrorCode::ConfigInvalid, "staging buffers must be >= 1");
  }
  if (backend == BackendChoice::Socket && !endpoints.empty() &&
      static_cast<int>(endpoints.size()) != np) {
    raise(ErrorCode::ConfigInvalid, "need one endpoint per rank");
  }
}

namespace {

Plan<double> build_plan(const RunConfig& cfg, Direction dir,
                        const PlanOptions& options) {
  switch (cfg.decomp) {
    case DecompChoice::Slab:
      return plan_slab<double>(cfg.dims, cfg.grid.size(), cfg.kind, dir,
                               options);
    case DecompChoice::Pencil:
      return plan_pencil<double>(cfg.dims, cfg.grid, cfg.kind, dir, options);
    case DecompChoice::General:
      return plan_general<double>(cfg.dims, cfg.grid, cfg.kind, dir, options);
  }
  raise(ErrorCode::ConfigInvalid, "unreachable");
}

/// The deterministic benchmark field: the same global tensor on every grid
/// and backend for a given seed.
cxd seeded_value(std::uint64_t seed, std::int64_t flat, bool complex_field) {
  const double re = unit_from_hash(seed * 0x10001 + 2 * flat);
  if (!complex_field) return cxd(re, 0.0);
  return cxd(re, unit_from_hash(seed * 0x10001 + 2 * flat + 1));
}

DistTensor<double> make_input(transport::Comm& comm, const RunConfig& cfg,
                              const Plan<double>& plan, ExecContext& ctx,
                              std::vector<std::string>& warnings) {
  if (!cfg.input_path.empty()) {
    if (comm.rank() == 0 && plan.input.element == ElementKind::Complex) {
      warnings.push_back(
          "real tensor files are promoted to complex for C2C/C2R runs");
    }
    return read_tensor<double>(comm, plan.input, cfg.input_path);
  }
  if (cfg.kind == TransformKind::C2R) {
    // generate a real field and carry its unnormalized spectrum as input
    RunConfig fwd_cfg = cfg;
    fwd_cfg.kind = TransformKind::R2C;
    auto fwd = build_plan(fwd_cfg, Direction::Forward, {});
    auto field = DistTensor<double>::zeros(fwd.input, comm.rank());
    fill_from_global(field,
                     [&](std::int64_t flat, std::span<const std::int64_t>) {
                       return seeded_value(cfg.seed, flat, false);
                     });
    auto spectrum = execute(fwd, field, ctx);
    return spectrum;
  }
  auto x = DistTensor<double>::zeros(plan.input, comm.rank());
  fill_from_global(x, [&](std::int64_t flat, std::span<const std::int64_t>) {
    return seeded_value(cfg.seed, flat, cfg.kind == TransformKind::C2C);
  });
  return x;
}

/// Gathered-output oracle check; returns the relative error.
double verification_error(transport::Comm& comm, const RunConfig& cfg,
                          const DistTensor<double>& input,
                          const DistTensor<double>& output) {
  std::vector<cxd> in_full;
  std::vector<cxd> out_full;
  std::vector<double> out_real;
  if (input.dist.element == ElementKind::Real) {
    auto r = gather_global_real(comm, input);
    in_full.assign(r.begin(), r.end());
  } else {
    in_full = gather_global_complex(comm, input);
  }
  if (output.dist.element == ElementKind::Real) {
    out_real = gather_global_real(comm, output);
  } else {
    out_full = gather_global_complex(comm, output);
  }
  if (comm.rank() != 0) return 0.0;

  // energies via the dispatched sum-of-squares kernel over interleaved parts
  const auto sumsq = [](std::span<const double> v) {
    return simd::ops().sumsq_f64(v.data(), v.size());
  };
  double num = 0.0, den = 0.0;
  if (cfg.kind == TransformKind::C2R) {
    // reference: Hermitian-extend the input spectrum, inverse oracle, 1/N
    const GlobalDims& dims = cfg.dims;
    const std::int64_t n_last = dims.extent.back();
    const std::int64_t n_half = n_last / 2 + 1;
    const std::int64_t rows = dims.total() / n_last;
    std::vector<cxd> full(dims.total());
    std::vector<std::int64_t> coord(dims.ndim(), 0);
    for (std::int64_t row = 0; row < rows; ++row) {
      for (std::int64_t k = 0; k < n_last; ++k) {
        if (k < n_half) {
          full[row * n_last + k] = in_full[row * n_half + k];
        } else {
          // mirror coordinate: negate every axis index mod its length
          std::int64_t mrow = 0;
          std::int64_t r = row;
          std::vector<std::int64_t> c(dims.ndim() - 1);
          for (std::size_t a = dims.ndim() - 1; a-- > 0;) {
            c[a] = r % dims[a];
            r /= dims[a];
          }
          for (std::size_t a = 0; a < c.size(); ++a) {
            const std::int64_t neg = c[a] == 0 ? 0 : dims[a] - c[a];
            mrow = mrow * dims[a] + neg;
          }
          const std::int64_t mk = n_last - k;
          full[row * n_last + k] = std::conj(in_full[mrow * n_half + mk]);
        }
      }
    }
    auto ref = dft_oracle<double>(std::span<const cxd>(full), dims.extent,
                                  Direction::Backward);
    const double inv_n = 1.0 / static_cast<double>(dims.total());
    std::vector<double> want(dims.total()), diff(dims.total());
    for (std::int64_t i = 0; i < dims.total(); ++i) {
      want[i] = ref[i].real() * inv_n;
      diff[i] = out_real[i] - want[i];
    }
    num = sumsq(want.empty() ? std::span<const double>() : std::span<const double>(diff));
    den = sumsq(std::span<const double>(want));
  } else {
    auto ref = dft_oracle<double>(std::span<const cxd>(in_full),
                                  cfg.dims.extent, Direction::Forward);
    if (cfg.kind == TransformKind::R2C) {
      const std::int64_t n_last = cfg.dims.extent.back();
      const std::int64_t n_half = n_last / 2 + 1;
      const std::int64_t rows = cfg.dims.total() / n_last;
      std::vector<cxd> half;
      half.reserve(rows * n_half);
      for (std::int64_t row = 0; row < rows; ++row) {
        for (std::int64_t k = 0; k < n_half; ++k) {
          half.push_back(ref[row * n_last + k]);
        }
      }
      ref = std::move(half);
    }
    std::vector<cxd> diff(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) diff[i] = out_full[i] - ref[i];
    num = sumsq(std::span<const double>(
        reinterpret_cast<const double*>(diff.data()), 2 * diff.size()));
    den = sumsq(std::span<const double>(
        reinterpret_cast<const double*>(ref.data()), 2 * ref.size()));
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace

RunReport run(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.finalize();

  transport::WorldOptions wopts;
  wopts.deadlock_timeout_s = cfg.deadlock_timeout_s;
  if (cfg.backend == BackendChoice::CostModel) wopts.cost_model = cfg.cost;

  RunReport report;
  report.config = cfg;
  report.flops = flops_estimate(cfg.dims);

  const bool verify_feasible = cfg.dims.total() <= kOracleGuard;
  const bool do_verify =
      cfg.verify == VerifyMode::On ||
      (cfg.verify == VerifyMode::Auto && verify_feasible);

  auto body = [&](transport::Comm& comm) -> int {
    PlanOptions popts;
    popts.exchange = cfg.pipelined ? ExchangePath::Pipelined
                     : cfg.backend == BackendChoice::CostModel
                         ? ExchangePath::Staged
                         : ExchangePath::Blocking;
    popts.chunks_per_peer = cfg.chunks;
    popts.staging_buffers = cfg.staging_buffers;
    const Direction dir = cfg.kind == TransformKind::C2R ? Direction::Backward
                                                         : Direction::Forward;
    auto plan = build_plan(cfg, dir, popts);
    auto ctx = make_context(plan, comm);

    std::vector<std::string> local_warnings = plan.warnings;
    auto input = make_input(comm, cfg, plan, ctx, local_warnings);

    for (int w = 0; w < cfg.warmup; ++w) {
      (void)execute(plan, input, ctx);
    }

    std::vector<TimingBreakdown> reduced;
    DistTensor<double> output;
    for (int r = 0; r < cfg.reps; ++r) {
      transport::barrier(comm);
      TimingBreakdown tb;
      output = execute(plan, input, ctx, &tb);
      const double raw[6] = {tb.local_fft,    tb.pack,      tb.unpack,
                             tb.staging_copy, tb.wire_comm, tb.total};
      auto parts = transport::gather_bytes(
          comm, bytes::from_values(std::span<const double>(raw, 6)));
      if (comm.rank() == 0) {
        TimingBreakdown max{};
        for (const auto& part : parts) {
          const auto v = bytes::to_values<double>(part);
          TimingBreakdown t{v[0], v[1], v[2], v[3], v[4], v[5]};
          max.max_with(t);
        }
        reduced.push_back(max);
      }
    }

    if (!cfg.output_path.empty()) {
      write_tensor(comm, output, cfg.output_path);
    }

    double rel_error = 0.0;
    if (do_verify) {
      rel_error = verification_error(comm, cfg, input, output);
    }

    if (comm.rank() == 0) {
      report.reps = std::move(reduced);
      std::vector<std::size_t> order(report.reps.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.reps[a].total < report.reps[b].total;
      });
      report.best = report.reps[order.front()];
      report.median = report.reps[order[(order.size() - 1) / 2]];
      report.gflops = report.best.total > 0.0
                          ? report.flops / report.best.total / 1e9
                          : 0.0;
      if (do_verify) {
        report.verify_rel_error = rel_error;
        report.verify_status = rel_error <= 1e-10 ? VerifyStatus::Passed
                                                  : VerifyStatus::Failed;
      } else {
        report.verify_status = VerifyStatus::Skipped;
        if (cfg.verify == VerifyMode::Auto && !verify_feasible) {
          local_warnings.push_back(
              "verification skipped: problem exceeds the oracle guard");
        }
      }
      report.warnings = std::move(local_warnings);
    }
    return 0;
  };

  if (cfg.backend == BackendChoice::Socket) {
    transport::spawn_socket_world(cfg.np, body, cfg.endpoints, wopts);
  } else {
    transport::spawn_world(cfg.np, body, wopts);
  }
  return report;
}

const char* kind_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::C2C: return "c2c";
    case TransformKind::R2C: return "r2c";
    case TransformKind::C2R: return "c2r";
  }
  return "?";
}

const char* decomp_name(DecompChoice decomp) {
  switch (decomp) {
    case DecompChoice::Slab: return "slab";
    case DecompChoice::Pencil: return "pencil";
    case DecompChoice::General: return "general";
  }
  return "?";
}

const char* backend_name(BackendChoice backend) {
  switch (backend) {
    case BackendChoice::InProcess: return "inprocess";
    case BackendChoice::CostModel: return "costmodel";
    case BackendChoice::Socket: return "socket";
  }
  return "?";
}

const char* verify_status_name(VerifyStatus status) {
  switch (status) {
    case VerifyStatus::Skipped: return "skipped";
    case VerifyStatus::Passed: return "passed";
    case VerifyStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

nlohmann::json breakdown_json(const TimingBreakdown& t) {
  return nlohmann::json{{"local_fft", t.local_fft},
                        {"pack", t.pack},
                        {"unpack", t.unpack},
                        {"staging_copy", t.staging_copy},
                        {"wire_comm", t.wire_comm},
                        {"total", t.total}};
}

}  // namespace

std::string to_json(const RunReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = {
      {"dims", report.config.dims.extent},
      {"grid", report.config.grid.shape},
      {"kind", kind_name(report.config.kind)},
      {"decomp", decomp_name(report.config.decomp)},
      {"backend", backend_name(report.config.backend)},
      {"pipelined", report.config.pipelined},
      {"chunks", report.config.chunks},
      {"staging_buffers", report.config.staging_buffers},
      {"reps", report.config.reps},
      {"warmup", report.config.warmup},
      {"seed", report.config.seed},
  };
  if (report.config.backend == BackendChoice::CostModel) {
    j["config"]["cost_model"] = {
        {"latency", report.config.cost.latency},
        {"inv_bandwidth", report.config.cost.inv_bandwidth},
        {"staging_inv_bandwidth", report.config.cost.staging_inv_bandwidth},
        {"flop_time", report.config.cost.flop_time},
        {"memcpy_inv_bandwidth", report.config.cost.memcpy_inv_bandwidth},
    };
  }
  j["timings"] = {{"unit", "seconds"},
                  {"reps", nlohmann::json::array()},
                  {"min", breakdown_json(report.best)},
                  {"median", breakdown_json(report.median)}};
  for (const auto& rep : report.reps) {
    j["timings"]["reps"].push_back(breakdown_json(rep));
  }
  j["performance"] = {{"flops_estimate", report.flops},
                      {"gflops", report.gflops}};
  j["verification"] = {{"status", verify_status_name(report.verify_status)},
                       {"rel_error", report.verify_rel_error}};
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string to_csv(const RunReport& report) {
  std::string out =
      "rep,local_fft,pack,unpack,staging_copy,wire_comm,total\n";
  auto row = [](const std::string& name, const TimingBreakdown& t) {
    auto f = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.9e", v);
      return std::string(buf);
    };
    return name + "," + f(t.local_fft) + "," + f(t.pack) + "," + f(t.unpack) +
           "," + f(t.staging_copy) + "," + f(t.wire_comm) + "," + f(t.total) +
           "\n";
  };
  for (std::size_t i = 0; i < report.reps.size(); ++i) {
    out += row(std::to_string(i), report.reps[i]);
  }
  out += row("min", report.best);
  out += row("median", report.median);
  return out;
}

}  // namespace dfft::bench
