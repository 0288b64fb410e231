// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "dfft/layout.hpp"
#include "dfft/socket_transport.hpp"
#include "dfft/timing.hpp"

namespace dfft::bench {

/// Cooley-Tukey operation count 5*N*log2(N) with N the product of dims.
/// Exact integer arithmetic for power-of-two N.
double flops_estimate(const GlobalDims& dims);

enum class Topology { Hypercube, Torus3d };

/// Machine constants for the closed-form execution-time model.
struct ComplexityModel {
  Topology topology = Topology::Hypercube;
  double compute_constant = 1.0;  // seconds per flop-ish model unit
  double comm_constant = 1.0;     // seconds per comm model unit
};

struct TfftPrediction {
  double compute = 0.0;
  double comm = 0.0;
  double total() const { return compute + comm; }
};

/// T_FFT = c1*N*log2(N)/P + c2*N/P (hypercube) or c2*N/P^(2/3) (3-D torus).
TfftPrediction predict_tfft(const GlobalDims& dims, int ranks,
                            const ComplexityModel& model);

/// Most-square factorization with factors in non-increasing order.
ProcessGrid auto_grid(int ranks, std::size_t grid_axes);

enum class DecompChoice { Slab, Pencil, General };
enum class BackendChoice { InProcess, CostModel, Socket };
enum class VerifyMode { Auto, On, Off };
enum class ReportFormat { Json, Csv };

struct RunConfig {
  GlobalDims dims;
  ProcessGrid grid;  // empty: auto-factored from np
  int np = 1;
  TransformKind kind = TransformKind::C2C;
  DecompChoice decomp = DecompChoice::Pencil;
  BackendChoice backend = BackendChoice::InProcess;
  bool pipelined = false;
  int chunks = 1;
  int staging_buffers = 2;
  int reps = 3;
  int warmup = 1;
  std::uint64_t seed = 1;
  VerifyMode verify = VerifyMode::Auto;
  ReportFormat format = ReportFormat::Json;
  std::string input_path;
  std::string output_path;
  transport::CostModel cost{1e-6, 1e-9, 5e-10, 1e-9, 1e-10};
  std::vector<transport::Endpoint> endpoints;  // socket rendezvous
  double deadlock_timeout_s = 30.0;

  /// Fills the grid from np when absent and checks arity/invariants.
  void finalize();
};

enum class VerifyStatus { Skipped, Passed, Failed };

struct RunReport {
  RunConfig config;
  std::vector<TimingBreakdown> reps;  // reduced (max over ranks), per rep
  TimingBreakdown best;               // componentwise view of the min-total rep
  TimingBreakdown median;             // rep with the median total
  double flops = 0.0;
  double gflops = 0.0;  // flops / min total / 1e9
  VerifyStatus verify_status = VerifyStatus::Skipped;
  double verify_rel_error = 0.0;
  std::vector<std::string> warnings;
};

/// Spawns the configured world, runs warmups and timed repetitions, then
/// verifies against the brute-force oracle when enabled and feasible.
RunReport run(const RunConfig& config);

std::string to_json(const RunReport& report);
std::string to_csv(const RunReport& report);

const char* kind_name(TransformKind kind);
const char* decomp_name(DecompChoice decomp);
const char* backend_name(BackendChoice backend);
const char* verify_status_name(VerifyStatus status);

}  // namespace dfft::bench
