#pragma once

namespace basisforge {

/// Storage cleanup threshold: after any arithmetic, coefficients with
/// absolute value below this are dropped from the sparse representation.
inline constexpr double kDropTol = 1e-15;

/// Global orthonormality assertion tolerance (Gram defects, cross inner
/// products, family admission checks).
inline constexpr double kOrthoTol = 1e-10;

/// Residual-norm threshold below which a probe vector is considered to lie
/// in the span of the already-built system and the corrective step falls
/// back to a synthetic direction.
inline constexpr double kLambdaMin = 1e-8;

/// Acceptance floor for fallback corrective candidates: a candidate whose
/// Gram-Schmidt residual norm falls below this is rejected as numerically
/// unreliable.
inline constexpr double kFallbackFloor = 1e-3;

/// Unit-norm slack accepted for externally supplied vectors (explicit probe
/// families, explicit input systems).
inline constexpr double kUnitTol = 1e-12;

/// Candidates drawn from the generated probe family must keep at least this
/// much of their norm after projection off the untouched tail blocks;
/// anything smaller is discarded as too aligned with the input system.
inline constexpr double kProjectionFloor = 0.5;

/// Largest n for which the (n+1) x (n+1) completion matrix may be
/// materialized as a dense array.
inline constexpr unsigned kMaterializeGuard = 1u << 15;

/// Run-time adjustable tolerances. Defaults mirror the global constants;
/// a config file may override them for experimentation.
struct Tolerances {
  double ortho_tol = kOrthoTol;
  double lambda_min = kLambdaMin;
};

}  // namespace basisforge
