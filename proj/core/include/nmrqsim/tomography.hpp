#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nmrqsim/molecule.hpp"
#include "nmrqsim/pulse.hpp"
#include "nmrqsim/qops.hpp"
#include "nmrqsim/readout.hpp"

namespace nmrqsim {

struct Acquisition {
  double dwell_s = 5e-4;
  int n_samples = 4096;
  double duration_s() const { return dwell_s * n_samples; }
};

struct PlanEntry {
  PulseSequence reading_pulses;  // hard pulses only, no delays
  std::vector<Channel> channels;
};

struct TomographyPlan {
  std::vector<PlanEntry> entries;
};

/// Normalized Pauli-product basis labels for n spins, lexicographic with
/// I < X < Y < Z per factor, the all-identity string excluded (4^n - 1 items).
std::vector<std::string> pauli_basis_labels(int n_spins);

/// The operators for pauli_basis_labels, each scaled to unit Hilbert-Schmidt
/// norm.
std::vector<ComplexMatrix> pauli_basis(int n_spins);

// Twelve reading-pulse settings, each acquiring both channels. Candidates are
// all per-spin combinations of {identity, 90x, 90y}; entries are picked
// greedily by the rank they add to the measurement matrix, then padded with
// unused candidates to exactly twelve. Throws if rank 4^n - 1 is unreachable,
// reporting the achieved rank.
TomographyPlan default_plan(const Molecule& m, const Acquisition& acq = {});

struct MeasurementMatrix {
  Eigen::MatrixXcd entries;  // rows: (plan entry, channel, peak); cols: basis ops
  std::vector<std::string> basis;
  struct RowKey {
    int entry_index = 0;
    Channel channel = Channel::H;
    int peak_index = 0;
  };
  std::vector<RowKey> rows;
  std::map<Channel, std::vector<PeakModel>> peaks;
  Acquisition acquisition;
  double condition_number = 0.0;
};

// Column j holds the deconvolved peak coefficients observed when basis
// operator j is pushed through every plan entry: conjugate by the reading
// pulses, synthesize the FID, transform, deconvolve against the calibration
// peaks. The readout chain is linear in the state, so this matrix maps basis
// coefficients to observations exactly.
MeasurementMatrix assemble_measurement_matrix(const TomographyPlan& plan, const Molecule& m,
                                              const std::map<Channel, std::vector<PeakModel>>& peaks,
                                              const Acquisition& acq = {});

// Deterministic noise source for synthetic observations: mt19937_64 driving a
// Box-Muller normal transform, so streams are reproducible.
class NoiseSource {
 public:
  explicit NoiseSource(uint64_t seed) : engine_(seed) {}
  double normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Observed coefficient vector for a state: the same chain the matrix columns
/// went through. When noise is given, complex Gaussian noise of standard
/// deviation rel_sigma * max|spectrum| is added to every spectral sample
/// before deconvolution.
std::vector<Complex> observe(const ComplexMatrix& rho, const TomographyPlan& plan,
                             const Molecule& m, const MeasurementMatrix& mm,
                             double noise_rel_sigma = 0.0, NoiseSource* noise = nullptr);

struct Reconstruction {
  ComplexMatrix rho;                        // hermitized deviation matrix
  Eigen::VectorXcd coefficients;            // 4^n - 1 basis coefficients
  double anti_hermitian_residual = 0.0;     // max |(rho - rho')/2| before hermitizing
  double lsq_residual = 0.0;
  std::vector<double> per_acquisition_residuals;  // one per (entry, channel)
};

Reconstruction reconstruct(const std::vector<Complex>& observed, const MeasurementMatrix& mm);

/// <target| rho |target>, real part. Warns on stderr when tr(rho) strays from
/// one; throws if the quadratic form has a significant imaginary part.
double fidelity(const ComplexMatrix& rho, const ComplexVector& target);

struct MerminCorrelators {
  double xxx = 0.0;
  double xyy = 0.0;
  double yxy = 0.0;
  double yyx = 0.0;
};

/// tr(rho * sigma_a sigma_b sigma_c) for the four GHZ witness strings.
MerminCorrelators mermin_correlators(const ComplexMatrix& rho);

}  // namespace nmrqsim
