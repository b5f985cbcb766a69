#pragma once

#include <vector>

#include "nmrqsim/molecule.hpp"
#include "nmrqsim/qops.hpp"

namespace nmrqsim {

// Traceless part of a thermal density matrix together with the per-spin
// weights it was built from.
struct DeviationMatrix {
  ComplexMatrix matrix;
  std::vector<double> weight_vector;
  double scale = 1.0;
};

/// scale * sum_k weight_k * sigma_z^(k), each term embedded on its spin.
DeviationMatrix thermal_deviation(const Molecule& m, const std::vector<double>& weights,
                                  double scale);

/// Channel defaults: weight 4 for H spins, 1 for C spins, overall scale 4,
/// which reproduces the integer eigenvalue ladder of the three-spin system.
DeviationMatrix thermal_deviation(const Molecule& m);

/// p |0..0><0..0| + (1-p)/N * I with N = 2^n_spins.
ComplexMatrix pseudo_pure(double p, int n_spins);

struct UnitarityDiagnostic {
  RealVector eigs_in;
  RealVector eigs_out;
  double max_abs_mismatch = 0.0;  // max_i |in_i - out_i|, both sorted descending
};

/// How unitary was the evolution: slot-wise comparison of the sorted
/// eigenvalue ladders of the input deviation matrix and the output state.
UnitarityDiagnostic unitarity_diagnostic(const DeviationMatrix& rho_in,
                                         const ComplexMatrix& rho_out);

enum class EigSelector { MatchGroundRank, Largest, Smallest };

struct ExtractionReport {
  RealVector input_eigenvalues;      // of rho_out, descending
  RealVector reference_eigenvalues;  // of rho_ref, descending
  double max_mismatch = 0.0;
  int selected_rank = 0;
  double selected_eigenvalue = 0.0;
  ComplexMatrix extracted_state;  // rank-1 projector, trace 1
};

// Pseudo-pure extraction: diagonalize rho_out and project onto the
// eigenvector whose eigenvalue rank matches the rank that |0..0> holds in the
// reference ladder (selector MatchGroundRank); Largest/Smallest override the
// rank for experimentation. Refuses when the designated eigenvalue cannot be
// identified: its gap to the nearest neighbor must exceed 10x the observed
// ladder mismatch.
ExtractionReport extract_pseudo_pure(const ComplexMatrix& rho_out,
                                     const DeviationMatrix& rho_ref,
                                     EigSelector selector = EigSelector::MatchGroundRank);

}  // namespace nmrqsim
