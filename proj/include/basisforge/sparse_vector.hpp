#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "basisforge/tolerances.hpp"

namespace basisforge {

/// A square-summable sequence with finitely many nonzero coordinates,
/// stored as (index, coefficient) pairs sorted by strictly increasing index.
///
/// Values are immutable once constructed; every operation returns a fresh
/// vector. After any arithmetic, coefficients with |c| < kDropTol are
/// dropped, so a vector is zero exactly when it stores no entries.
class SparseL2Vector {
 public:
  struct Entry {
    std::uint32_t index;
    double coef;
  };

  SparseL2Vector() = default;

  /// The reference sequence e_index (single coordinate, coefficient 1).
  static SparseL2Vector unit(std::uint32_t index);

  /// Builds a vector from arbitrary entries: sorts by index, combines
  /// duplicates additively, drops coefficients below kDropTol.
  static SparseL2Vector from_entries(std::vector<Entry> entries);

  bool empty() const { return entries_.empty(); }
  std::size_t support_size() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }

  /// Coefficient at a coordinate; zero when the coordinate is not stored.
  double coef(std::uint32_t index) const;

  /// Largest stored coordinate index. Requires a nonzero vector.
  std::uint32_t max_index() const;

 private:
  explicit SparseL2Vector(std::vector<Entry> sorted) : entries_(std::move(sorted)) {}

  std::vector<Entry> entries_;
};

/// One term of a linear combination: weight * (*vec).
struct WeightedVec {
  double weight;
  const SparseL2Vector* vec;
};

/// <u, v> by merging the two sorted supports. O(|u| + |v|).
double inner(const SparseL2Vector& u, const SparseL2Vector& v);

/// l2 norm. Exact zero only for the zero vector.
double norm(const SparseL2Vector& u);

/// sum_i w_i * v_i in one pass. Coefficients that cancel below kDropTol
/// disappear from the result. Zero-weight terms are skipped.
SparseL2Vector linear_combination(std::span<const WeightedVec> terms);

/// v + a * u.
SparseL2Vector axpy(double a, const SparseL2Vector& u, const SparseL2Vector& v);

/// a * u.
SparseL2Vector scale(double a, const SparseL2Vector& u);

/// Result of projecting onto a finite orthonormal family: the coefficient
/// list (one per family member, in order) and what is left over.
struct Projection {
  std::vector<double> coefficients;
  SparseL2Vector residual;
};

/// Orthogonal projection of g onto span(family) for an orthonormal family.
/// residual = g - sum_i <g, f_i> f_i, computed in a single combination pass
/// so the residual is orthogonal to each family member to within roundoff.
Projection project_onto_orthonormal(const SparseL2Vector& g,
                                    std::span<const SparseL2Vector> family);

/// max_i |u_i - v_i| over the union of both supports.
double max_abs_diff(const SparseL2Vector& u, const SparseL2Vector& v);

}  // namespace basisforge
