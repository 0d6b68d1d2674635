#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basisforge/driver.hpp"

namespace basisforge {

/// One perturbed vector's distance from its source, with the bound it must
/// stay under. global_index is the 1-based position in the combined system.
struct PerturbationEntry {
  std::uint64_t global_index = 0;
  std::uint32_t block = 0;       // 1-based block number
  double norm = 0.0;             // ||perturbed - source||
  double strict_bound = 0.0;     // 1/sqrt(n_k); norm must stay strictly below
};

/// Per-step residual bookkeeping. residual_at_step is measured against the
/// perturbed vectors built through the end of step k (there it must equal
/// lambda/sqrt(2) exactly); residual_full is measured against the finished
/// system, which can only shrink it.
struct ResidualCheck {
  std::uint32_t k = 0;
  double recovery_sq = 0.0;        // ||c * sum(perturbed_k) - corrective_k||^2
  double lambda_over_sqrt2 = 0.0;
  double residual_at_step = 0.0;
  double residual_full = 0.0;
  bool fallback_used = false;
};

struct CertificateEntry {
  std::uint32_t k = 0;
  double residual = 0.0;  // best-approximation residual against the full system
};

/// The approximation certificate: every consumed probe must be approximated
/// by the built system with residual below alpha. This certifies the finite
/// sample of probes that the run actually consumed; it is evidence for, not
/// a proof of, completeness.
struct CertificateSection {
  double alpha = 0.0;
  std::vector<CertificateEntry> entries;
  bool pass = true;
};

/// Cumulative squared perturbation sizes, blockwise. Each block contributes
/// exactly 2 - sqrt(2), so the partial sums grow linearly without bound.
struct BariSection {
  std::vector<double> increments;
  std::vector<double> partial_sums;
  double max_increment_error = 0.0;  // worst |increment - (2 - sqrt(2))|
};

/// sup over the combined system of sqrt(position) * perturbation norm.
/// Only meaningful for geometric schedules, where the partial sums of block
/// sizes stay within a constant factor of the last block.
struct DecaySection {
  bool applicable = false;
  double sup_scaled = 0.0;
  double bound = 0.0;  // sqrt((2 - sqrt(2)) * base / (base - 1))
  bool within = true;
};

struct EpsilonSection {
  double epsilon = 0.0;
  double max_norm = 0.0;
  bool pass = true;
};

/// One line of the verification verdict table.
struct CheckLine {
  std::string name;
  bool pass = true;
  std::string detail;
};

/// Everything the verification suite measured about a finished run.
struct CompletionReport {
  double orthonormality_defect = 0.0;  // over perturbed vectors and leftovers
  std::vector<PerturbationEntry> perturbations;
  double closed_form_max_error = 0.0;  // worst | ||d||^2 - (2-sqrt(2))/n_k |
  bool strict_bound_ok = true;
  std::vector<ResidualCheck> residual_checks;
  CertificateSection certificate;
  BariSection bari;
  DecaySection decay;
  std::optional<EpsilonSection> epsilon;
  std::vector<CheckLine> checks;
  bool pass = true;
};

/// Runs the full verification suite over a finished (or partial) run.
/// Re-materializes the input system from the config echo, so it works both
/// on fresh results and on results reloaded from disk.
CompletionReport build_report(const CompletionResult& result);

/// Best-approximation residuals of each probe against span(system), checked
/// against alpha. Pass iff every residual < alpha + 1e-9.
CertificateSection completeness_certificate(std::span<const SparseL2Vector> probes,
                                            std::span<const SparseL2Vector> system,
                                            double alpha);

/// Blockwise sums of squared perturbation norms and their running totals.
BariSection bari_partial_sums(std::span<const PerturbationEntry> perturbations);

/// Decay check for geometric schedules; flags others as not applicable.
DecaySection decay_fit(std::span<const PerturbationEntry> perturbations,
                       const BlockSchedule& sched);

/// Uniform guarantee check. Requires the first block to exceed 1/epsilon^2
/// (ConfigError otherwise, since that is a configuration bug, not a FAIL).
EpsilonSection epsilon_check(std::span<const PerturbationEntry> perturbations,
                             const BlockSchedule& sched, double epsilon);

}  // namespace basisforge
