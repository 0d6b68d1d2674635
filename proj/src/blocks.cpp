#include "basisforge/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "basisforge/errors.hpp"

namespace basisforge {

namespace {

// Largest working range we are willing to scan coordinate-by-coordinate.
constexpr std::uint32_t kRangeGuard = 1u << 24;

// Candidate draws per probe request before the generator gives up.
constexpr std::uint64_t kMaxAttempts = 1u << 16;

std::uint32_t max_support_index(const InputSystem& sys) {
  std::uint32_t top = 0;
  for (const auto& v : sys.vectors) {
    if (!v.empty()) top = std::max(top, v.max_index());
  }
  return top;
}

std::uint32_t resolve_working_range(const InputSystem& sys,
                                    std::uint32_t extra_range) {
  std::uint32_t range;
  if (sys.ambient_guard) {
    range = *sys.ambient_guard;
  } else {
    const std::uint64_t wide = static_cast<std::uint64_t>(max_support_index(sys)) +
                               extra_range + 16;
    range = static_cast<std::uint32_t>(std::min<std::uint64_t>(wide, UINT32_MAX));
  }
  if (range > kRangeGuard) {
    throw ConfigError("working range " + std::to_string(range) +
                      " exceeds the supported maximum " + std::to_string(kRangeGuard) +
                      "; supply a smaller ambient_guard");
  }
  return range;
}

std::vector<std::uint32_t> scan_free_coords(const InputSystem& sys,
                                            std::uint32_t range) {
  std::vector<bool> touched(static_cast<std::size_t>(range) + 1, false);
  for (const auto& v : sys.vectors) {
    for (const auto& e : v.entries()) {
      if (e.index <= range) touched[e.index] = true;
    }
  }
  std::vector<std::uint32_t> free_coords;
  for (std::uint32_t i = 0; i <= range; ++i) {
    if (!touched[i]) free_coords.push_back(i);
  }
  return free_coords;
}

}  // namespace

InputSystem reference_subset_system(std::span<const std::uint32_t> indices) {
  InputSystem sys;
  sys.vectors.reserve(indices.size());
  for (std::uint32_t i : indices) sys.vectors.push_back(SparseL2Vector::unit(i));
  return sys;
}

InputSystem explicit_system(std::vector<SparseL2Vector> vectors,
                            std::optional<std::uint32_t> ambient_guard) {
  InputSystem sys;
  sys.vectors = std::move(vectors);
  sys.ambient_guard = ambient_guard;
  return sys;
}

ValidationReport validate_input(const InputSystem& sys, std::uint32_t extra_range,
                                const Tolerances& tol) {
  if (sys.vectors.empty()) {
    throw ValidationError("input system is empty");
  }
  ValidationReport report;
  report.count = sys.vectors.size();
  for (std::size_t i = 0; i < sys.vectors.size(); ++i) {
    for (std::size_t j = i; j < sys.vectors.size(); ++j) {
      const double expected = (i == j) ? 1.0 : 0.0;
      const double defect = std::abs(inner(sys.vectors[i], sys.vectors[j]) - expected);
      report.max_pairwise_defect = std::max(report.max_pairwise_defect, defect);
    }
  }
  if (report.max_pairwise_defect > tol.ortho_tol) {
    throw ValidationError("input system is not orthonormal: max Gram defect " +
                          std::to_string(report.max_pairwise_defect));
  }
  report.working_range = resolve_working_range(sys, extra_range);
  report.free_coords = scan_free_coords(sys, report.working_range);
  report.witness_found = !report.free_coords.empty();
  return report;
}

std::uint64_t BlockSchedule::total() const {
  std::uint64_t sum = 0;
  for (std::uint32_t n : sizes) sum += n;
  return sum;
}

BlockSchedule explicit_schedule(std::vector<std::uint32_t> sizes) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw ConfigError("schedule sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) {
      throw ConfigError("schedule sizes must be strictly increasing");
    }
  }
  BlockSchedule sched;
  sched.kind = BlockSchedule::Kind::Explicit;
  sched.sizes = std::move(sizes);
  return sched;
}

BlockSchedule geometric_schedule(std::uint32_t first, std::uint32_t base,
                                 std::uint32_t steps) {
  if (first == 0) throw ConfigError("geometric schedule needs first block size >= 1");
  if (base < 2) throw ConfigError("geometric schedule needs base >= 2");
  BlockSchedule sched;
  sched.kind = BlockSchedule::Kind::Geometric;
  sched.first = first;
  sched.base = base;
  sched.steps = steps;
  std::uint64_t n = first;
  for (std::uint32_t k = 0; k < steps; ++k) {
    if (n > (1u << 31)) {
      throw ConfigError("geometric schedule grows beyond supported block sizes");
    }
    sched.sizes.push_back(static_cast<std::uint32_t>(n));
    n *= base;
  }
  return sched;
}

SubspaceIndex split_blocks(const InputSystem& sys, const BlockSchedule& sched) {
  const std::uint64_t need = sched.total();
  if (need > sys.vectors.size()) {
    throw ConfigError("schedule needs " + std::to_string(need) +
                      " vectors but the input system has " +
                      std::to_string(sys.vectors.size()));
  }
  SubspaceIndex index;
  std::size_t at = 0;
  for (std::uint32_t n : sched.sizes) {
    index.block_ranges.push_back({at, at + n});
    at += n;
  }
  index.working_range = resolve_working_range(
      sys, static_cast<std::uint32_t>(std::min<std::uint64_t>(need, UINT32_MAX)));
  index.free_coords = scan_free_coords(sys, index.working_range);
  return index;
}

DenseFamilyGenerator::DenseFamilyGenerator(DenseFamilySpec spec,
                                           const InputSystem* sys,
                                           const SubspaceIndex* index,
                                           const Tolerances& tol)
    : spec_(std::move(spec)), sys_(sys), index_(index), tol_(tol),
      engine_(spec_.seed) {
  if (spec_.mode == DenseFamilySpec::Mode::Generated && spec_.window_growth == 0) {
    throw ConfigError("probe family window growth must be >= 1");
  }
}

SparseL2Vector DenseFamilyGenerator::next(std::uint32_t k,
                                          std::span<const SparseL2Vector> avoid) {
  if (k == 0 || k > index_->block_ranges.size()) {
    throw std::logic_error("probe request outside the schedule");
  }
  if (k < emitted_) throw std::logic_error("probe requests must be nondecreasing");
  emitted_ = k;
  return spec_.mode == DenseFamilySpec::Mode::Generated ? next_generated(k, avoid)
                                                        : next_explicit(k);
}

std::vector<std::uint32_t> DenseFamilyGenerator::pool_for(std::uint32_t k) const {
  std::vector<std::uint32_t> pool = index_->free_coords;
  for (std::uint32_t b = 0; b + 1 < k; ++b) {
    const BlockRange& range = index_->block_ranges[b];
    for (std::size_t v = range.begin; v < range.end; ++v) {
      for (const auto& e : sys_->vectors[v].entries()) pool.push_back(e.index);
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

void DenseFamilyGenerator::check_probe(const SparseL2Vector& g, std::uint32_t k,
                                       const std::string& origin) const {
  const bool external = origin == "explicit";
  if (std::abs(norm(g) - 1.0) > (external ? kUnitTol : 1e-12)) {
    const std::string msg = "probe for step " + std::to_string(k) +
                            " is not unit norm (" + origin + ")";
    if (external) throw ConfigError(msg);
    throw std::logic_error(msg);
  }
  const std::size_t tail_begin = index_->block_ranges[k - 1].begin;
  const std::size_t tail_end = index_->block_ranges.back().end;
  for (std::size_t v = tail_begin; v < tail_end; ++v) {
    if (std::abs(inner(g, sys_->vectors[v])) > tol_.ortho_tol) {
      const std::string msg = "probe for step " + std::to_string(k) +
                              " is not orthogonal to the unprocessed blocks (" +
                              origin + ")";
      if (external) throw ConfigError(msg);
      throw std::logic_error(msg);
    }
  }
}

SparseL2Vector DenseFamilyGenerator::next_generated(
    std::uint32_t k, std::span<const SparseL2Vector> avoid) {
  const std::vector<std::uint32_t> pool = pool_for(k);
  if (pool.empty()) {
    throw FamilyExhausted("no admissible coordinates for the probe of step " +
                          std::to_string(k) + "; widen the working range");
  }
  const std::size_t tail_begin = index_->block_ranges[k - 1].begin;
  const std::size_t tail_end = index_->block_ranges.back().end;
  const std::span<const SparseL2Vector> tail(sys_->vectors.data() + tail_begin,
                                             tail_end - tail_begin);

  std::vector<std::uint32_t> window_slots;
  for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t level = candidates_tried_ / 4;
    ++candidates_tried_;

    const std::uint64_t want =
        2 + level * static_cast<std::uint64_t>(spec_.window_growth);
    const std::size_t window =
        static_cast<std::size_t>(std::min<std::uint64_t>(pool.size(), want));
    const std::uint64_t refine_cap = std::min<std::uint64_t>(spec_.grid_refine_cap, 20);
    const std::uint32_t exponent =
        2 + static_cast<std::uint32_t>(std::min<std::uint64_t>(level, refine_cap));
    const double denom = static_cast<double>(1u << exponent);

    // Partial Fisher-Yates over the window to pick distinct support slots.
    window_slots.resize(window);
    for (std::size_t i = 0; i < window; ++i) window_slots[i] = static_cast<std::uint32_t>(i);
    const std::size_t picks = 1 + static_cast<std::size_t>(engine_() % window);
    for (std::size_t i = 0; i < picks; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(engine_() % (window - i));
      std::swap(window_slots[i], window_slots[j]);
    }

    std::vector<SparseL2Vector::Entry> entries;
    entries.reserve(picks);
    bool all_zero = true;
    for (std::size_t i = 0; i < picks; ++i) {
      const auto span_2d = static_cast<std::uint64_t>(2 * denom) + 1;
      const double numer =
          static_cast<double>(static_cast<std::int64_t>(engine_() % span_2d) -
                              static_cast<std::int64_t>(denom));
      if (numer != 0.0) all_zero = false;
      entries.push_back({pool[window_slots[i]], numer / denom});
    }
    if (all_zero) continue;

    SparseL2Vector candidate = SparseL2Vector::from_entries(std::move(entries));
    candidate = scale(1.0 / norm(candidate), candidate);

    // The tail blocks and the avoid family are mutually orthogonal, so the
    // two sequential projections compose into one true projection.
    SparseL2Vector residual = project_onto_orthonormal(candidate, tail).residual;
    if (!avoid.empty()) {
      residual = project_onto_orthonormal(residual, avoid).residual;
    }
    const double kept = norm(residual);
    if (kept < kProjectionFloor) continue;

    SparseL2Vector probe = scale(1.0 / kept, residual);
    check_probe(probe, k, "generated");
    return probe;
  }
  throw FamilyExhausted("no admissible probe for step " + std::to_string(k) +
                        " after " + std::to_string(kMaxAttempts) +
                        " candidates; widen the working range");
}

SparseL2Vector DenseFamilyGenerator::next_explicit(std::uint32_t k) {
  if (k > spec_.probes.size()) {
    throw FamilyExhausted("explicit probe family has " +
                          std::to_string(spec_.probes.size()) +
                          " entries but step " + std::to_string(k) + " needs one");
  }
  const SparseL2Vector& probe = spec_.probes[k - 1];
  check_probe(probe, k, "explicit");
  return probe;
}

}  // namespace basisforge
