// basisforge: builds a complete orthonormal system from a non-complete one
// by small structured perturbations, and verifies every identity the
// construction is supposed to satisfy.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "basisforge/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"completion of orthonormal systems by structured perturbations"};
  app.require_subcommand(1);

  basisforge::RunOptions run_options;
  unsigned run_threads = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "run a construction from a config");
  run_cmd->add_option("--config", run_options.config_path, "config JSON path")
      ->required();
  run_cmd->add_option("--out", run_options.out_path, "write the run document here");
  run_cmd->add_option("--csv", run_options.csv_path,
                      "write perturbation norms as CSV here");
  run_cmd->add_flag("--no-vectors", run_options.no_vectors,
                    "omit vector payloads from the run document");
  run_cmd->add_flag("--verify", run_options.verify_steps,
                    "re-check step postconditions while running");
  run_cmd->add_option("--threads", run_threads,
                      "worker threads for the structured apply");

  std::string verify_path;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "re-run verification on a saved run document");
  verify_cmd->add_option("document", verify_path, "run document path")->required();

  std::uint32_t emit_n = 0;
  CLI::App* emit_cmd = app.add_subcommand(
      "emit-matrix", "print the dense mixing matrix for block size n as CSV");
  emit_cmd->add_option("n", emit_n, "block size")->required();

  std::vector<std::uint32_t> bench_sizes{8, 64, 256};
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "compare the structured apply against the rowwise reference");
  bench_cmd->add_option("--sizes", bench_sizes, "block sizes to measure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return basisforge::kExitError;
  }

  if (run_cmd->parsed()) {
    if (run_threads > 0) run_options.threads = run_threads;
    return basisforge::cmd_run(run_options, std::cout, std::cerr);
  }
  if (verify_cmd->parsed()) {
    return basisforge::cmd_verify(verify_path, std::cout, std::cerr);
  }
  if (emit_cmd->parsed()) {
    return basisforge::cmd_emit_matrix(emit_n, std::cout, std::cerr);
  }
  if (bench_cmd->parsed()) {
    return basisforge::cmd_bench(bench_sizes, std::cout, std::cerr);
  }
  return basisforge::kExitError;
}
