#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "basisforge/blocks.hpp"
#include "basisforge/tolerances.hpp"

namespace basisforge {

/// Declarative description of the input system, before materialization.
struct SystemSpec {
  enum class Kind { ReferenceSubset, Explicit };

  Kind kind = Kind::ReferenceSubset;
  std::vector<std::uint32_t> indices;        // ReferenceSubset
  std::vector<SparseL2Vector> vectors;       // Explicit
  std::optional<std::uint32_t> ambient_guard;
};

/// Declarative description of the block schedule.
struct ScheduleSpec {
  enum class Kind { Explicit, Geometric };

  Kind kind = Kind::Explicit;
  std::vector<std::uint32_t> values;         // Explicit
  std::optional<std::uint32_t> first;        // Geometric (derived when absent)
  std::uint32_t base = 2;                    // Geometric
  std::uint32_t steps = 0;                   // Geometric
};

/// Everything one run needs. Parsed from a JSON config file; the canonical
/// echo of this struct is embedded in every result document so a saved run
/// can be re-verified without the original file.
struct RunConfig {
  SystemSpec system;
  ScheduleSpec schedule;
  DenseFamilySpec family;

  /// Uniform perturbation guarantee: when set, the first block size must
  /// exceed 1/epsilon^2 (derived automatically for geometric schedules with
  /// no explicit first size; rejected otherwise).
  std::optional<double> epsilon;

  /// Truncate the schedule to this many steps (when smaller).
  std::optional<std::uint32_t> max_steps;

  /// Re-check step postconditions while running (slower, diagnostic).
  bool verify_steps = false;

  /// Certificate threshold; every probe residual must stay below it.
  double alpha = 0.70710678118654752;  // 1/sqrt(2)

  Tolerances tolerances;

  /// Worker count for the data-parallel structured apply (1 = serial).
  unsigned threads = 1;
};

}  // namespace basisforge
