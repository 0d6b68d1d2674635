#include "basisforge/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "basisforge/completion_matrix.hpp"
#include "basisforge/driver.hpp"
#include "basisforge/errors.hpp"
#include "basisforge/io.hpp"
#include "basisforge/verify.hpp"

namespace basisforge {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int report_and_exit_code(const CompletionReport& report, std::ostream& out) {
  out << report_to_text(report);
  return report.pass ? kExitPass : kExitFail;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const ojson config_json = parse_json_text(read_text_file(options.config_path),
                                              options.config_path);
    RunConfig config = parse_run_config(config_json);
    config.verify_steps = config.verify_steps || options.verify_steps;
    if (options.threads) config.threads = *options.threads;

    CompletionResult result;
    try {
      result = run(config);
    } catch (const RunAborted& aborted) {
      err << "run aborted at step " << aborted.failed_step() << ": "
          << aborted.what() << "\n";
      if (!options.out_path.empty()) {
        // Preserve the partial construction for diagnosis.
        ojson doc = ojson::object();
        doc["config"] = canonical_config_json(config);
        doc["result"] = result_to_json(aborted.partial(), !options.no_vectors);
        doc["aborted_at_step"] = aborted.failed_step();
        write_text_file(options.out_path, doc.dump(2) + "\n");
        err << "partial result written to " << options.out_path << "\n";
      }
      return kExitError;
    }

    const CompletionReport report = build_report(result);
    if (!options.out_path.empty()) {
      write_text_file(options.out_path,
                      document_to_json(result, report, !options.no_vectors).dump(2) +
                          "\n");
    }
    if (!options.csv_path.empty()) {
      write_text_file(options.csv_path, perturbations_to_csv(report));
    }
    return report_and_exit_code(report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_verify(const std::string& document_path, std::ostream& out,
               std::ostream& err) {
  try {
    const ojson doc = parse_json_text(read_text_file(document_path), document_path);
    if (!doc.is_object() || !doc.contains("config") || !doc.contains("result")) {
      throw ConfigError(document_path +
                        ": not a run document (missing config/result)");
    }
    CompletionResult result = result_from_json(doc["result"]);
    result.config = parse_run_config(doc["config"]);
    const CompletionReport report = build_report(result);
    return report_and_exit_code(report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_emit_matrix(std::uint32_t n, std::ostream& out, std::ostream& err) {
  try {
    const CompletionMatrix m = make_completion_matrix(n);
    out << matrix_to_csv(m);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", orthogonality_defect(m));
    err << "orthogonality defect: " << buf << "\n";
    return kExitPass;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

std::vector<BenchRow> run_bench(std::span<const std::uint32_t> sizes) {
  std::vector<BenchRow> rows;
  for (std::uint32_t n : sizes) {
    const CompletionMatrix m = make_completion_matrix(n);
    std::vector<SparseL2Vector> block;
    block.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) block.push_back(SparseL2Vector::unit(i));
    const SparseL2Vector probe = SparseL2Vector::unit(n);

    BenchRow row;
    row.n = n;

    const double t0 = now_ms();
    const ApplyResult structured = apply_structured(m, block, probe);
    const double t1 = now_ms();
    const ApplyResult naive = apply_naive(m, block, probe);
    const double t2 = now_ms();
    row.structured_ms = t1 - t0;
    row.naive_ms = t2 - t1;
    row.ratio = row.naive_ms / std::max(row.structured_ms, 1e-6);

    for (std::uint32_t j = 0; j < n; ++j) {
      row.max_diff = std::max(
          row.max_diff, max_abs_diff(structured.rotated[j], naive.rotated[j]));
    }
    row.max_diff =
        std::max(row.max_diff, max_abs_diff(structured.leftover, naive.leftover));
    row.equivalent = row.max_diff <= 1e-12;
    rows.push_back(row);
  }
  return rows;
}

int cmd_bench(std::span<const std::uint32_t> sizes, std::ostream& out,
              std::ostream& err) {
  try {
    const std::vector<BenchRow> rows = run_bench(sizes);
    char line[256];
    std::snprintf(line, sizeof(line), "%8s %16s %16s %10s %12s\n", "n",
                  "structured_ms", "naive_ms", "ratio", "max_diff");
    out << line;
    bool all_equivalent = true;
    for (const auto& row : rows) {
      std::snprintf(line, sizeof(line), "%8u %16.3f %16.3f %10.1f %12.3e\n",
                    row.n, row.structured_ms, row.naive_ms, row.ratio,
                    row.max_diff);
      out << line;
      all_equivalent = all_equivalent && row.equivalent;
      if (!row.equivalent) {
        err << "paths disagree at n = " << row.n << " (max diff "
            << row.max_diff << ")\n";
      } else if (row.ratio < 10.0) {
        err << "warning: speedup below 10x at n = " << row.n << "\n";
      }
    }
    return all_equivalent ? kExitPass : kExitFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace basisforge
