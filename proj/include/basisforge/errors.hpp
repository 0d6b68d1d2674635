#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace basisforge {

/// Malformed or inconsistent configuration (bad JSON, contradictory fields,
/// schedule that cannot satisfy a requested guarantee). Maps to CLI exit 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The supplied input system failed ingest validation (empty, or not
/// orthonormal within tolerance). Maps to CLI exit 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The probe family ran out of admissible candidates. Usually signals a
/// working range that is too small for the requested schedule.
class FamilyExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction step could not complete (degenerate fallback failure,
/// violated step postcondition under per-step verification).
class StepError : public std::runtime_error {
 public:
  StepError(std::uint32_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::uint32_t step() const { return step_; }

 private:
  std::uint32_t step_ = 0;
};

}  // namespace basisforge
