#pragma once

namespace deconflict {

// Numeric tolerances shared across the library. All distances are in NM,
// times in hours, speeds in NM/h, angles in radians.

// Squared relative speed below which motion is treated as static.
inline constexpr double kSpeedFloor2 = 1e-9;

// Relative slack on the separation function g, scaled by ||v||^2 * d^2.
inline constexpr double kSepTolScale = 1e-9;

// Half-width of the boundary band excluded when cross-checking the
// half-plane disjunction against the separation predicate.
inline constexpr double kBoundaryBand = 1e-6;

// Largest KKT residual accepted as an optimality certificate.
inline constexpr double kKktTol = 1e-8;

// The verifier flags any pair that comes closer than d minus this margin (NM).
inline constexpr double kVerifyMargin = 1e-4;

}  // namespace deconflict
