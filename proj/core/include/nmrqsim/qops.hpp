#pragma once

#include <complex>
#include <Eigen/Dense>

namespace nmrqsim {

using Complex = std::complex<double>;

// Dense square complex matrix; the carrier for states, Hamiltonians and
// propagators throughout the library. Row-major ordering is a serialization
// convention only (see io.hpp); in memory this is a plain Eigen matrix.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class PauliAxis { I, X, Y, Z };

/// 2x2 identity or Pauli matrix for the given axis.
ComplexMatrix pauli(PauliAxis axis);

/// Kronecker product: out(i*dim(b)+k, j*dim(b)+l) = a(i,j) * b(k,l).
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// I (x) ... (x) op (x) ... (x) I with `op` at tensor slot `spin_index`
/// (slot 0 is the leftmost factor). Requires 0 <= spin_index < n_spins <= 4.
ComplexMatrix embed_single(const ComplexMatrix& op, int spin_index, int n_spins);

/// Computational basis column vector |index> of the given dimension.
ComplexVector basis_state(int dim, int index);

double max_hermitian_asymmetry(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tolerance);
bool is_unitary(const ComplexMatrix& m, double tolerance);

// Hermitian eigendecomposition with deterministic ordering: eigenvalues
// sorted descending; inside a degenerate cluster eigenvectors are ordered by
// descending magnitude of their first significant component, then by the
// index of that component, and each vector's phase is fixed so that component
// is real positive.
struct EigenSystem {
  RealVector eigenvalues;       // sorted descending
  ComplexMatrix eigenvectors;   // column i pairs with eigenvalues[i]
};

/// Rejects inputs whose asymmetry exceeds tol::kHermitianInput (relative to
/// the largest entry); the exception message carries the measured asymmetry.
EigenSystem hermitian_eig(const ComplexMatrix& m);

/// exp(-i * h * t) computed through the eigendecomposition of Hermitian h.
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

/// U * rho * U^dagger.
ComplexMatrix conjugate(const ComplexMatrix& rho, const ComplexMatrix& u);

enum class PhaseMode { GlobalOnly, GlobalAndLocalZ };

// Max-entry distance between two unitaries after phase alignment.
// GlobalOnly aligns one global phase using the largest-magnitude entry of v;
// GlobalAndLocalZ additionally minimizes over one z-phase per spin applied
// after v (coordinate descent over the phase angles).
double distance_up_to_phase(const ComplexMatrix& u, const ComplexMatrix& v,
                            PhaseMode mode);

}  // namespace nmrqsim
