#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "basisforge/sparse_vector.hpp"

namespace basisforge {

/// The (n+1) x (n+1) orthogonal mixing matrix used by one completion step,
/// held in closed form (only n and the off-diagonal weight gamma are stored).
///
/// Layout, with c = 1/sqrt(2n) and d = 1/sqrt(2):
///
///   [ 1-g  -g   ...  -g   c ]
///   [ -g   1-g  ...  -g   c ]
///   [ ...            ...  c ]
///   [ -g   -g   ... 1-g   c ]
///   [ -c   -c   ...  -c   d ]
///
/// where g = gamma(n) = 1 / ((2 + sqrt(2)) * n). This choice makes the
/// matrix exactly orthogonal: the defining identity is
/// n*g^2 - 2*g + 1/(2n) = 0 together with n*g = 1 - 1/sqrt(2).
struct CompletionMatrix {
  std::uint32_t n = 0;
  double gamma = 0.0;
};

/// Builds the mixing matrix for block size n >= 1.
CompletionMatrix make_completion_matrix(std::uint32_t n);

/// The off-diagonal weight gamma(n). Satisfies 0 < gamma(n) < 1/(2n).
double completion_gamma(std::uint32_t n);

/// Expands the closed form into a dense matrix. Guarded: n is capped at
/// kMaterializeGuard to keep the allocation bounded; beyond that the closed
/// form and the structured application are the only access paths.
Eigen::MatrixXd materialize(const CompletionMatrix& m);

/// max |(A^T A - I)_ij| over the materialized matrix. Computed from the
/// dense matrix, not from the closed-form identity, so it is an independent
/// witness that the matrix really is orthogonal.
double orthogonality_defect(const CompletionMatrix& m);

/// Output of applying the mixing matrix to (block[0..n-1], g): n rotated
/// block vectors plus the leftover direction produced by the last row.
struct ApplyResult {
  std::vector<SparseL2Vector> rotated;
  SparseL2Vector leftover;
};

/// Applies the mixing matrix using its closed form. Each output row needs
/// only the running block sum S = sum_i block[i]:
///
///   rotated[j] = block[j] - gamma * S + c * g
///   leftover   = -c * S + d * g
///
/// so the whole step costs O(n) vector combinations instead of the O(n^2)
/// a rowwise dense product would spend. `threads` > 1 splits the row loop
/// across that many workers; results do not depend on the thread count.
///
/// When check_inputs is set, the inputs are first verified to be orthonormal
/// within kOrthoTol (throws std::invalid_argument otherwise).
ApplyResult apply_structured(const CompletionMatrix& m,
                             std::span<const SparseL2Vector> block,
                             const SparseL2Vector& g,
                             unsigned threads = 1,
                             bool check_inputs = false);

/// Reference implementation: materializes the matrix and accumulates every
/// output row as a chain of scaled additions, one per input vector. This is
/// the plain rowwise product the structured path is measured against; it is
/// kept deliberately naive (O(n^2) vector operations) and must agree with
/// apply_structured to within 1e-12 coefficientwise.
ApplyResult apply_naive(const CompletionMatrix& m,
                        std::span<const SparseL2Vector> block,
                        const SparseL2Vector& g);

}  // namespace basisforge
