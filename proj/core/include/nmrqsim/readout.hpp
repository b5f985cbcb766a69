#pragma once

#include <vector>

#include "nmrqsim/molecule.hpp"
#include "nmrqsim/qops.hpp"

namespace nmrqsim {

struct Fid {
  Channel channel = Channel::H;
  double dwell_s = 0.0;
  std::vector<Complex> samples;
};

struct Spectrum {
  std::vector<double> freqs_hz;  // uniform ascending grid centered on 0
  std::vector<Complex> amps;
};

// One Lorentzian line: amplitude * exp(i phase) / (decay + i 2 pi (f - center)).
struct PeakModel {
  double center_hz = 0.0;
  double decay_rate_per_s = 1.0;  // lambda = 1/T2*
  double amplitude = 1.0;
  double phase_rad = 0.0;
};

// Free-induction decay of rho on one channel:
//   s(t_j) = sum_{spins k on channel} tr(rho(t_j) D_k) exp(-t_j / T2*_k)
// with rho(t) = exp(-i H t) rho exp(+i H t). The detection operator D_k is
// the transverse ladder operator embedded on spin k, with the sign convention
// pinned so that a spin at offset d produces the line exp(+i 2 pi d t).
// Samples are evaluated in the Hamiltonian eigenbasis as closed-form sums of
// complex exponentials; there is no time stepping.
Fid synthesize_fid(const ComplexMatrix& rho, const Molecule& m, Channel channel,
                   double duration_s, double dwell_s);

/// Discrete Fourier transform scaled by the dwell time, with the first sample
/// half-weighted (the usual correction for the t = 0 discontinuity), arranged
/// on the centered frequency grid. A decaying exponential maps to a complex
/// Lorentzian at its offset.
Spectrum fourier(const Fid& f);

Complex lorentzian(double freq_hz, const PeakModel& p);

/// Evaluate a sum of peaks on the grid.
std::vector<Complex> peak_superposition(const std::vector<double>& freqs_hz,
                                        const std::vector<PeakModel>& peaks);

struct FitResult {
  std::vector<PeakModel> peaks;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Simultaneous least-squares refinement of all peak parameters against the
// spectrum (damped Gauss-Newton with forward-difference derivatives).
// Converges when the relative objective decrease drops below 1e-10 or after
// 500 iterations; ten consecutive rejected steps count as divergence and the
// best parameters seen so far are returned with converged = false.
FitResult fit_calibration(const Spectrum& spec, const std::vector<PeakModel>& guesses);

struct DeconvolutionResult {
  std::vector<Complex> coefficients;  // one per peak: |c| intensity, arg(c) phase
  double residual_norm = 0.0;
  double condition_number = 0.0;
};

/// Linear least squares of the spectrum against unit-amplitude, zero-phase
/// Lorentzians at the calibrated centers and decay rates. Throws when the
/// peak design matrix is rank deficient (the condition number is reported in
/// the message).
DeconvolutionResult deconvolve(const Spectrum& spec, const std::vector<PeakModel>& peaks);

/// Exact line list for one channel, derived from the Hamiltonian eigenbasis:
/// one unit peak per resolvable transition of each spin on the channel, with
/// the spin's 1/T2* as decay rate. Coincident transitions are merged.
std::vector<PeakModel> calibration_peaks(const Molecule& m, Channel channel);

}  // namespace nmrqsim
