#pragma once

namespace nmrqsim::tol {

// Central tolerance table. Every numeric gate in the library refers to one of
// these named constants so thresholds can be audited in a single place.
inline constexpr double kAlgebraic = 1e-12;       // exact algebraic identities
inline constexpr double kUnitarity = 1e-10;       // ||U'U - I||_max for unitaries
inline constexpr double kEigResidual = 1e-9;      // eigendecomposition residuals
inline constexpr double kHermitianInput = 1e-9;   // accepted asymmetry of Hermitian inputs
inline constexpr double kStateOverlap = 1e-8;     // |<0..0| overlap| gate in compile checks

}  // namespace nmrqsim::tol
