#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "basisforge/sparse_vector.hpp"
#include "basisforge/tolerances.hpp"

namespace basisforge {

/// The orthonormal system to be completed. Vectors are indexed in the order
/// they will be consumed by the block schedule.
struct InputSystem {
  std::vector<SparseL2Vector> vectors;

  /// Optional cap on the working range (largest coordinate index considered
  /// when hunting for free coordinates). When absent, a default range is
  /// derived from the supports and the schedule.
  std::optional<std::uint32_t> ambient_guard;
};

/// Convenience constructors for the two supported input shapes.
InputSystem reference_subset_system(std::span<const std::uint32_t> indices);
InputSystem explicit_system(std::vector<SparseL2Vector> vectors,
                            std::optional<std::uint32_t> ambient_guard = {});

/// What ingest validation measured.
struct ValidationReport {
  std::size_t count = 0;
  double max_pairwise_defect = 0.0;    // worst |<v_i, v_j> - delta_ij|
  std::uint32_t working_range = 0;     // largest coordinate index scanned
  std::vector<std::uint32_t> free_coords;  // coordinates untouched by every vector
  bool witness_found = false;          // at least one free coordinate exists
};

/// Checks that the system is nonempty and orthonormal within tol.ortho_tol,
/// and scans the working range for coordinates no input vector touches
/// (witnesses that the system cannot be complete on the reference basis).
/// `extra_range` widens the scan beyond the largest support index; callers
/// that know the schedule pass the total block size here.
ValidationReport validate_input(const InputSystem& sys,
                                std::uint32_t extra_range = 0,
                                const Tolerances& tol = {});

/// Sizes n_1 < n_2 < ... of the blocks the input system is split into.
struct BlockSchedule {
  enum class Kind { Explicit, Geometric };

  Kind kind = Kind::Explicit;
  std::vector<std::uint32_t> sizes;

  // Geometric parameters, kept for reporting; sizes holds the expansion.
  std::uint32_t first = 0;
  std::uint32_t base = 0;
  std::uint32_t steps = 0;

  std::uint64_t total() const;
};

/// Explicit schedule; sizes must be strictly increasing and positive.
BlockSchedule explicit_schedule(std::vector<std::uint32_t> sizes);

/// first, first*base, first*base^2, ... for `steps` terms (base >= 2).
BlockSchedule geometric_schedule(std::uint32_t first, std::uint32_t base,
                                 std::uint32_t steps);

/// Half-open range [begin, end) into InputSystem::vectors.
struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Where each block lives, plus the free coordinates of the working range.
/// Block k (1-based) covers vectors [block_ranges[k-1].begin, .end).
struct SubspaceIndex {
  std::vector<BlockRange> block_ranges;
  std::vector<std::uint32_t> free_coords;
  std::uint32_t working_range = 0;
};

/// Partitions the input system according to the schedule and records the
/// free coordinates of the (schedule-aware) working range. Throws
/// ConfigError when the schedule needs more vectors than the system has.
SubspaceIndex split_blocks(const InputSystem& sys, const BlockSchedule& sched);

/// How the probe family is produced.
struct DenseFamilySpec {
  enum class Mode { Generated, Explicit };

  Mode mode = Mode::Generated;

  // Generated mode: deterministic candidate enumeration parameters.
  std::uint64_t seed = 1;
  std::uint32_t window_growth = 1;    // pool window widens by this per level
  std::uint32_t grid_refine_cap = 8;  // dyadic grid exponent stops growing here

  // Explicit mode: the probes themselves, consumed in order.
  std::vector<SparseL2Vector> probes;
};

/// Emits the probe vectors g_1, g_2, ... consumed by the construction steps.
///
/// Generated mode enumerates candidates over a growing window of admissible
/// coordinates (free coordinates plus coordinates of already-processed
/// blocks) with dyadic-rational coefficients on a grid that refines as the
/// enumeration proceeds. Each candidate is normalized, projected off the
/// not-yet-processed blocks and off the caller's `avoid` family (the
/// construction passes its leftover vectors, which keeps every emitted
/// vector of the run pairwise orthonormal), and accepted only if it keeps
/// at least kProjectionFloor of its norm. The draw sequence depends only on
/// the family spec (seed and growth parameters) and the request order, never
/// on wall time.
///
/// Explicit mode replays the supplied probes, validating each one: unit norm
/// within kUnitTol and orthogonal to every block >= k within tol.ortho_tol.
/// Explicit probes are not forced off `avoid`; callers own that trade-off.
class DenseFamilyGenerator {
 public:
  DenseFamilyGenerator(DenseFamilySpec spec, const InputSystem* sys,
                       const SubspaceIndex* index, const Tolerances& tol = {});

  /// The probe for step k (1-based). Requires k to be nondecreasing across
  /// calls. Throws FamilyExhausted when no admissible candidate exists.
  SparseL2Vector next(std::uint32_t k,
                      std::span<const SparseL2Vector> avoid = {});

  std::uint64_t candidates_tried() const { return candidates_tried_; }

 private:
  SparseL2Vector next_generated(std::uint32_t k,
                                std::span<const SparseL2Vector> avoid);
  SparseL2Vector next_explicit(std::uint32_t k);
  std::vector<std::uint32_t> pool_for(std::uint32_t k) const;
  void check_probe(const SparseL2Vector& g, std::uint32_t k,
                   const std::string& origin) const;

  DenseFamilySpec spec_;
  const InputSystem* sys_;
  const SubspaceIndex* index_;
  Tolerances tol_;
  std::mt19937_64 engine_;
  std::uint64_t candidates_tried_ = 0;
  std::uint32_t emitted_ = 0;
};

}  // namespace basisforge
