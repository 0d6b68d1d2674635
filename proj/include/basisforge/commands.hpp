#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace basisforge {

/// Exit codes shared by every subcommand.
///   0  run/verification passed
///   1  configuration or runtime error
///   2  verification FAIL
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;

struct RunOptions {
  std::string config_path;
  std::string out_path;               // optional: write the full run document
  std::string csv_path;               // optional: write perturbation norms
  bool no_vectors = false;            // drop vector payloads from the document
  bool verify_steps = false;          // per-step postcondition checks
  std::optional<unsigned> threads;    // override the config's worker count
};

/// Runs a construction from a config file, prints the verdict table, and
/// optionally writes the result document and CSV.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Re-runs the verification suite on a saved run document.
int cmd_verify(const std::string& document_path, std::ostream& out,
               std::ostream& err);

/// Prints the dense mixing matrix for block size n as CSV on out and its
/// orthogonality defect on err.
int cmd_emit_matrix(std::uint32_t n, std::ostream& out, std::ostream& err);

/// One benchmark measurement: structured vs naive application at size n.
struct BenchRow {
  std::uint32_t n = 0;
  double structured_ms = 0.0;
  double naive_ms = 0.0;
  double ratio = 0.0;      // naive_ms / structured_ms
  double max_diff = 0.0;   // coefficientwise disagreement between the paths
  bool equivalent = false; // max_diff <= 1e-12
};

/// Applies both paths to the reference inputs (e_0..e_{n-1}, probe e_n) and
/// times them. The equivalence check is part of the measurement.
std::vector<BenchRow> run_bench(std::span<const std::uint32_t> sizes);

/// Prints a benchmark table; exits nonzero when the paths disagree.
int cmd_bench(std::span<const std::uint32_t> sizes, std::ostream& out,
              std::ostream& err);

}  // namespace basisforge
