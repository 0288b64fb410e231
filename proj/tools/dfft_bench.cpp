// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

// Benchmark and demo driver: runs one configured distributed transform over
// the in-process, cost-model or socket backend and reports the timing
// breakdown. Exit codes: 0 success, 2 verification failure, 1 error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dfft/bench.hpp"

namespace {

int run_cli(int argc, char** argv) {
  CLI::App app{"dfft-bench: distributed FFT benchmark driver"};

  dfft::bench::RunConfig cfg;
  std::vector<std::int64_t> dims;
  std::vector<int> grid;
  std::string kind = "c2c";
  std::string decomp = "pencil";
  std::string backend = "inprocess";
  std::string verify = "auto";
  std::string format = "json";
  std::string out_path;
  std::string hosts;
  std::string hosts_file;

  app.add_option("--dims", dims, "global tensor extents, e.g. 8,8,8")
      ->required()
      ->delimiter(',');
  app.add_option("--grid", grid, "process grid, e.g. 2,2")->delimiter(',');
  app.add_option("--np", cfg.np, "rank count (grid auto-factored)");
  app.add_option("--kind", kind, "transform kind")
      ->check(CLI::IsMember({"c2c", "r2c", "c2r"}));
  app.add_option("--decomp", decomp, "decomposition")
      ->check(CLI::IsMember({"slab", "pencil", "general"}));
  app.add_option("--backend", backend, "execution backend")
      ->check(CLI::IsMember({"inprocess", "costmodel", "socket"}));
  app.add_option("--pipelined", cfg.pipelined,
                 "overlap staging copies with sends/receives (true|false)");
  app.add_option("--chunks", cfg.chunks, "pipelined sub-chunks per peer");
  app.add_option("--staging-buffers", cfg.staging_buffers,
                 "staging buffer count (pipelined needs >= 2)");
  app.add_option("--reps", cfg.reps, "timed repetitions");
  app.add_option("--warmup", cfg.warmup, "untimed warmup executions");
  app.add_option("--seed", cfg.seed, "input field seed");
  app.add_option("--out", out_path, "write the report here (default stdout)");
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--latency", cfg.cost.latency, "cost model: seconds/message");
  app.add_option("--inv-bw", cfg.cost.inv_bandwidth,
                 "cost model: wire seconds/byte");
  app.add_option("--staging-inv-bw", cfg.cost.staging_inv_bandwidth,
                 "cost model: staging-copy seconds/byte");
  app.add_option("--memcpy-inv-bw", cfg.cost.memcpy_inv_bandwidth,
                 "cost model: pack/unpack seconds/byte");
  app.add_option("--flop-time", cfg.cost.flop_time,
                 "cost model: seconds/flop for local FFT work");
  app.add_option("--verify", verify, "oracle verification")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  app.add_option("--input", cfg.input_path, "DTNS tensor to transform");
  app.add_option("--output", cfg.output_path, "write the result tensor here");
  app.add_option("--hosts", hosts,
                 "socket rendezvous list host:port,host:port,...");
  app.add_option("--hosts-file", hosts_file,
                 "file with one host:port per line");
  app.add_option("--timeout", cfg.deadlock_timeout_s,
                 "deadlock detection timeout in seconds");

  CLI11_PARSE(app, argc, argv);

  cfg.dims = dfft::GlobalDims{dims};
  if (!grid.empty()) cfg.grid = dfft::ProcessGrid{grid};
  cfg.kind = kind == "c2c"   ? dfft::TransformKind::C2C
             : kind == "r2c" ? dfft::TransformKind::R2C
                             : dfft::TransformKind::C2R;
  cfg.decomp = decomp == "slab"     ? dfft::bench::DecompChoice::Slab
               : decomp == "pencil" ? dfft::bench::DecompChoice::Pencil
                                    : dfft::bench::DecompChoice::General;
  cfg.backend = backend == "inprocess" ? dfft::bench::BackendChoice::InProcess
                : backend == "costmodel"
                    ? dfft::bench::BackendChoice::CostModel
                    : dfft::bench::BackendChoice::Socket;
  cfg.verify = verify == "auto" ? dfft::bench::VerifyMode::Auto
               : verify == "on" ? dfft::bench::VerifyMode::On
                                : dfft::bench::VerifyMode::Off;
  cfg.format = format == "json" ? dfft::bench::ReportFormat::Json
                                : dfft::bench::ReportFormat::Csv;
  if (!hosts.empty()) cfg.endpoints = dfft::transport::parse_endpoints(hosts);
  if (!hosts_file.empty()) {
    std::ifstream in(hosts_file);
    if (!in) {
      std::cerr << "error: cannot read hosts file " << hosts_file << "\n";
      return 1;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto parsed = dfft::transport::parse_endpoints(line);
      cfg.endpoints.insert(cfg.endpoints.end(), parsed.begin(), parsed.end());
    }
  }

  const auto report = dfft::bench::run(cfg);
  const std::string rendered = cfg.format == dfft::bench::ReportFormat::Json
                                   ? dfft::bench::to_json(report)
                                   : dfft::bench::to_csv(report);
  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    out << rendered;
  }
  for (const auto& w : report.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (report.verify_status == dfft::bench::VerifyStatus::Failed) {
    std::cerr << "verification FAILED (rel error " << report.verify_rel_error
              << ")\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
