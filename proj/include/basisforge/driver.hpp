#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "basisforge/blocks.hpp"
#include "basisforge/completion_matrix.hpp"
#include "basisforge/config.hpp"
#include "basisforge/errors.hpp"
#include "basisforge/sparse_vector.hpp"

namespace basisforge {

/// Everything one construction step produced.
struct StepRecord {
  std::uint32_t k = 0;        // 1-based step number
  std::uint32_t n = 0;        // block size n_k
  SparseL2Vector probe;       // the probe vector g_k consumed by this step
  std::vector<double> prior_coefficients;  // <g_k, psi_i> over all earlier outputs
  double lambda = 0.0;        // norm of g_k's residual against earlier outputs
  bool fallback_used = false; // probe was degenerate; corrective synthesized
  SparseL2Vector corrective;  // unit vector fed into the mixing matrix
  std::vector<SparseL2Vector> perturbed;  // the n_k new system vectors
  SparseL2Vector leftover;    // the extra direction produced by the last row
};

/// The corrective direction for one step, before the matrix is applied.
struct CorrectiveChoice {
  std::vector<double> prior_coefficients;
  double lambda = 0.0;
  bool fallback_used = false;
  SparseL2Vector corrective;
};

/// Decomposes the probe against all previously built system vectors. When
/// the residual norm stays at or above tol.lambda_min the corrective is the
/// normalized residual (re-orthogonalized once for hygiene). Otherwise the
/// probe lies in the span of the built system and a fallback corrective is
/// synthesized: reference-basis candidates over the admissible coordinates
/// are Gram-Schmidted against the built vectors, the leftovers, and the
/// unprocessed blocks until one keeps at least kFallbackFloor of its norm.
CorrectiveChoice choose_corrective(const SparseL2Vector& probe,
                                   std::span<const SparseL2Vector> built,
                                   const InputSystem& sys,
                                   const SubspaceIndex& index,
                                   std::uint32_t k,
                                   std::span<const SparseL2Vector> leftovers = {},
                                   const Tolerances& tol = {});

/// All construction outputs, in step order.
struct CompletionResult {
  RunConfig config;                 // canonical echo of what was run
  std::vector<StepRecord> steps;

  /// The new system vectors flattened across steps, in emission order.
  std::vector<SparseL2Vector> flattened() const;
};

/// A run that stopped early: carries whatever completed before the failure
/// so diagnostics can still be produced.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(std::string what, std::uint32_t failed_step, CompletionResult partial)
      : std::runtime_error(std::move(what)),
        failed_step_(failed_step),
        partial_(std::make_shared<CompletionResult>(std::move(partial))) {}

  std::uint32_t failed_step() const { return failed_step_; }
  const CompletionResult& partial() const { return *partial_; }

 private:
  std::uint32_t failed_step_ = 0;
  std::shared_ptr<CompletionResult> partial_;
};

/// Mutable state threaded through the steps of one run.
struct RunState {
  const InputSystem* sys = nullptr;
  const SubspaceIndex* index = nullptr;
  DenseFamilyGenerator* family = nullptr;
  Tolerances tol;
  bool verify_steps = false;
  unsigned threads = 1;

  std::vector<SparseL2Vector> built;      // all perturbed vectors so far
  std::vector<SparseL2Vector> leftovers;  // one per completed step
};

/// Runs step k (1-based): draws the probe, chooses the corrective, applies
/// the mixing matrix to (block_k, corrective) and appends the outputs to
/// state.built. With verify_steps set, re-checks the step postconditions
/// (perturbation size, residual identity) and throws StepError on violation.
StepRecord run_step(RunState& state, std::uint32_t k);

/// Materializes the configured system, validates it, resolves the schedule
/// (applying the epsilon rule), and runs every step. Throws ConfigError /
/// ValidationError for bad inputs and RunAborted when a step fails midway.
CompletionResult run(const RunConfig& config);

/// The schedule actually used by a run with this config (epsilon rule and
/// max_steps truncation applied). Exposed for re-verification of saved runs.
BlockSchedule resolve_schedule(const RunConfig& config);

/// Builds the InputSystem described by the config.
InputSystem materialize_system(const SystemSpec& spec);

}  // namespace basisforge
