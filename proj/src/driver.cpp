#include "basisforge/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace basisforge {

namespace {

// Norm of every perturbation, squared: ||rotated_j - block_j||^2 is the
// same closed-form constant (2 - sqrt(2)) / n for every row of a block.
double perturbation_sq(std::uint32_t n) {
  return (2.0 - std::sqrt(2.0)) / static_cast<double>(n);
}

std::vector<std::uint32_t> fallback_pool(const InputSystem& sys,
                                         const SubspaceIndex& index,
                                         std::uint32_t k) {
  std::vector<std::uint32_t> pool = index.free_coords;
  for (std::uint32_t b = 0; b + 1 < k; ++b) {
    const BlockRange& range = index.block_ranges[b];
    for (std::size_t v = range.begin; v < range.end; ++v) {
      for (const auto& e : sys.vectors[v].entries()) pool.push_back(e.index);
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

SparseL2Vector fallback_corrective(std::span<const SparseL2Vector> built,
                                   std::span<const SparseL2Vector> leftovers,
                                   const InputSystem& sys,
                                   const SubspaceIndex& index,
                                   std::uint32_t k) {
  const std::size_t tail_begin = index.block_ranges[k - 1].begin;
  const std::size_t tail_end = index.block_ranges.back().end;
  const std::span<const SparseL2Vector> tail(sys.vectors.data() + tail_begin,
                                             tail_end - tail_begin);
  for (std::uint32_t coord : fallback_pool(sys, index, k)) {
    SparseL2Vector r = SparseL2Vector::unit(coord);
    // Two Gram-Schmidt sweeps: the built vectors, the leftovers, and the
    // unprocessed blocks are mutually orthogonal, so sequential projection
    // is a true projection.
    for (int pass = 0; pass < 2; ++pass) {
      r = project_onto_orthonormal(r, built).residual;
      r = project_onto_orthonormal(r, leftovers).residual;
      r = project_onto_orthonormal(r, tail).residual;
    }
    const double kept = norm(r);
    if (kept >= kFallbackFloor) return scale(1.0 / kept, r);
  }
  throw StepError(k,
                  "no fallback corrective direction survives Gram-Schmidt; "
                  "the working range is too small");
}

unsigned env_thread_cap() {
  const char* raw = std::getenv("BASISFORGE_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  const long parsed = std::strtol(raw, nullptr, 10);
  if (parsed < 1) return 1;
  return static_cast<unsigned>(parsed);
}

unsigned capped_threads(unsigned requested) {
  const unsigned cap = env_thread_cap();
  if (requested < 1) requested = 1;
  if (cap != 0) requested = std::min(requested, cap);
  return requested;
}

}  // namespace

CorrectiveChoice choose_corrective(const SparseL2Vector& probe,
                                   std::span<const SparseL2Vector> built,
                                   const InputSystem& sys,
                                   const SubspaceIndex& index,
                                   std::uint32_t k,
                                   std::span<const SparseL2Vector> leftovers,
                                   const Tolerances& tol) {
  CorrectiveChoice choice;
  Projection decomposition = project_onto_orthonormal(probe, built);
  choice.prior_coefficients = std::move(decomposition.coefficients);
  choice.lambda = norm(decomposition.residual);
  if (choice.lambda >= tol.lambda_min) {
    SparseL2Vector c = scale(1.0 / choice.lambda, decomposition.residual);
    // Second orthogonalization pass: a small residual norm amplifies the
    // roundoff the projection left along the built vectors.
    c = project_onto_orthonormal(c, built).residual;
    choice.corrective = scale(1.0 / norm(c), c);
  } else {
    choice.fallback_used = true;
    choice.corrective = fallback_corrective(built, leftovers, sys, index, k);
  }
  return choice;
}

StepRecord run_step(RunState& state, std::uint32_t k) {
  const BlockRange& range = state.index->block_ranges[k - 1];
  const std::span<const SparseL2Vector> block(
      state.sys->vectors.data() + range.begin, range.size());
  const auto n = static_cast<std::uint32_t>(range.size());

  StepRecord rec;
  rec.k = k;
  rec.n = n;
  rec.probe = state.family->next(k, state.leftovers);

  CorrectiveChoice choice = choose_corrective(rec.probe, state.built, *state.sys,
                                              *state.index, k, state.leftovers,
                                              state.tol);
  rec.prior_coefficients = std::move(choice.prior_coefficients);
  rec.lambda = choice.lambda;
  rec.fallback_used = choice.fallback_used;
  rec.corrective = std::move(choice.corrective);

  const CompletionMatrix matrix = make_completion_matrix(n);
  ApplyResult applied;
  try {
    applied = apply_structured(matrix, block, rec.corrective, state.threads,
                               state.verify_steps);
  } catch (const std::invalid_argument& e) {
    throw StepError(k, e.what());
  }

  if (state.verify_steps) {
    const double want_sq = perturbation_sq(n);
    for (std::size_t j = 0; j < applied.rotated.size(); ++j) {
      const SparseL2Vector diff = axpy(-1.0, block[j], applied.rotated[j]);
      const double got = inner(diff, diff);
      if (std::abs(got - want_sq) > 1e-10) {
        throw StepError(k, "perturbation size is off the closed form at row " +
                               std::to_string(j));
      }
    }
    std::vector<WeightedVec> terms;
    const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
    terms.reserve(applied.rotated.size() + 1);
    for (const auto& v : applied.rotated) terms.push_back({c, &v});
    terms.push_back({-1.0, &rec.corrective});
    const SparseL2Vector residual = linear_combination(terms);
    if (std::abs(inner(residual, residual) - 0.5) > 1e-10) {
      throw StepError(k, "corrective recovery residual is off 1/2");
    }
  }

  rec.perturbed = applied.rotated;
  rec.leftover = std::move(applied.leftover);
  state.built.insert(state.built.end(),
                     std::make_move_iterator(applied.rotated.begin()),
                     std::make_move_iterator(applied.rotated.end()));
  state.leftovers.push_back(rec.leftover);
  return rec;
}

InputSystem materialize_system(const SystemSpec& spec) {
  if (spec.kind == SystemSpec::Kind::ReferenceSubset) {
    InputSystem sys = reference_subset_system(spec.indices);
    sys.ambient_guard = spec.ambient_guard;
    return sys;
  }
  return explicit_system(spec.vectors, spec.ambient_guard);
}

BlockSchedule resolve_schedule(const RunConfig& config) {
  if (config.epsilon && *config.epsilon <= 0.0) {
    throw ConfigError("epsilon must be positive");
  }
  BlockSchedule sched;
  if (config.schedule.kind == ScheduleSpec::Kind::Explicit) {
    sched = explicit_schedule(config.schedule.values);
    if (config.epsilon && !sched.sizes.empty()) {
      const double floor = 1.0 / (*config.epsilon * *config.epsilon);
      if (static_cast<double>(sched.sizes.front()) <= floor) {
        throw ConfigError("first block size " + std::to_string(sched.sizes.front()) +
                          " does not exceed 1/epsilon^2");
      }
    }
  } else {
    std::uint32_t first = 0;
    if (config.schedule.first) {
      first = *config.schedule.first;
      if (config.epsilon) {
        const double floor = 1.0 / (*config.epsilon * *config.epsilon);
        if (static_cast<double>(first) <= floor) {
          throw ConfigError("first block size " + std::to_string(first) +
                            " does not exceed 1/epsilon^2");
        }
      }
    } else if (config.epsilon) {
      const double floor = 1.0 / (*config.epsilon * *config.epsilon);
      std::uint64_t p = 1;
      while (static_cast<double>(p) <= floor) {
        p *= config.schedule.base;
        if (p > (1u << 31)) {
          throw ConfigError("epsilon guarantee needs a first block size beyond "
                            "the supported maximum");
        }
      }
      first = static_cast<std::uint32_t>(p);
    } else {
      throw ConfigError("geometric schedule needs a first block size or epsilon");
    }
    sched = geometric_schedule(first, config.schedule.base, config.schedule.steps);
  }
  if (config.max_steps && *config.max_steps < sched.sizes.size()) {
    sched.sizes.resize(*config.max_steps);
    if (sched.kind == BlockSchedule::Kind::Geometric) {
      sched.steps = *config.max_steps;
    }
  }
  return sched;
}

std::vector<SparseL2Vector> CompletionResult::flattened() const {
  std::vector<SparseL2Vector> all;
  for (const auto& s : steps) {
    all.insert(all.end(), s.perturbed.begin(), s.perturbed.end());
  }
  return all;
}

CompletionResult run(const RunConfig& config) {
  InputSystem sys = materialize_system(config.system);
  const BlockSchedule sched = resolve_schedule(config);
  validate_input(sys,
                 static_cast<std::uint32_t>(
                     std::min<std::uint64_t>(sched.total(), UINT32_MAX)),
                 config.tolerances);
  const SubspaceIndex index = split_blocks(sys, sched);
  DenseFamilyGenerator family(config.family, &sys, &index, config.tolerances);

  RunState state;
  state.sys = &sys;
  state.index = &index;
  state.family = &family;
  state.tol = config.tolerances;
  state.verify_steps = config.verify_steps;
  state.threads = capped_threads(config.threads);

  CompletionResult result;
  result.config = config;
  for (std::uint32_t k = 1; k <= sched.sizes.size(); ++k) {
    try {
      result.steps.push_back(run_step(state, k));
    } catch (const StepError& e) {
      throw RunAborted(e.what(), k, std::move(result));
    } catch (const FamilyExhausted& e) {
      throw RunAborted(e.what(), k, std::move(result));
    }
  }
  return result;
}

}  // namespace basisforge
