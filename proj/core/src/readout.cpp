#include "nmrqsim/readout.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nmrqsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

// Transverse detection operator on one spin. sigma_x - i sigma_y picks the
// coherence that precesses as exp(+i 2 pi d t) under the -pi*d*sigma_z frame
// convention (positive offset -> positive-frequency line).
ComplexMatrix detection_operator(int spin, int n_spins) {
  return embed_single(pauli(PauliAxis::X) - kI * pauli(PauliAxis::Y), spin, n_spins);
}

struct OscillatorTerm {
  Complex weight;
  Complex step;   // per-sample phase/decay multiplier
  Complex state;  // running phasor, starts at 1
};

}  // namespace

Fid synthesize_fid(const ComplexMatrix& rho, const Molecule& m, Channel channel,
                   double duration_s, double dwell_s) {
  if (!(dwell_s > 0.0) || duration_s < dwell_s) {
    throw std::invalid_argument("synthesize_fid: need duration >= dwell > 0");
  }
  if (rho.rows() != m.dim() || rho.cols() != m.dim()) {
    throw std::invalid_argument("synthesize_fid: state dimension does not match molecule");
  }
  const std::vector<int> spins = m.channel_spins(channel);
  if (spins.empty()) {
    throw std::invalid_argument("synthesize_fid: channel " + channel_name(channel) +
                                " has no spins");
  }
  const auto n_samples = static_cast<size_t>(std::llround(duration_s / dwell_s));
  if (n_samples < 2) {
    throw std::invalid_argument("synthesize_fid: fewer than 2 samples");
  }

  const EigenSystem sys = hermitian_eig(effective_hamiltonian(m));
  const ComplexMatrix rho_eig = sys.eigenvectors.adjoint() * rho * sys.eigenvectors;
  const Eigen::Index dim = rho_eig.rows();

  std::vector<OscillatorTerm> terms;
  for (int k : spins) {
    const ComplexMatrix d_eig =
        sys.eigenvectors.adjoint() * detection_operator(k, m.n_spins()) * sys.eigenvectors;
    const double decay = 1.0 / m.spins[static_cast<size_t>(k)].t2star_s;
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) {
        const Complex w = rho_eig(a, b) * d_eig(b, a);
        if (std::abs(w) == 0.0) continue;
        const double omega = -(sys.eigenvalues(a) - sys.eigenvalues(b));
        terms.push_back(OscillatorTerm{
            w, std::exp((kI * omega - decay) * dwell_s), Complex{1.0, 0.0}});
      }
    }
  }

  Fid fid;
  fid.channel = channel;
  fid.dwell_s = dwell_s;
  fid.samples.assign(n_samples, Complex{0.0, 0.0});
  for (size_t j = 0; j < n_samples; ++j) {
    Complex acc{0.0, 0.0};
    for (OscillatorTerm& t : terms) {
      acc += t.weight * t.state;
      t.state *= t.step;
    }
    fid.samples[j] = acc;
  }
  return fid;
}

Spectrum fourier(const Fid& f) {
  const size_t n = f.samples.size();
  if (n < 2) throw std::invalid_argument("fourier: FID must have at least 2 samples");

  std::vector<Complex> in(f.samples);
  in[0] *= 0.5;  // half-point correction for the one-sided transform

  std::vector<Complex> out(n);
  fftw_plan plan = fftw_plan_dft_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  const double df = 1.0 / (f.dwell_s * static_cast<double>(n));
  Spectrum spec;
  spec.freqs_hz.resize(n);
  spec.amps.resize(n);
  const size_t half = n / 2;
  for (size_t i = 0; i < n; ++i) {
    spec.freqs_hz[i] = (static_cast<double>(i) - static_cast<double>(half)) * df;
    spec.amps[i] = f.dwell_s * out[(i + half) % n];
  }
  return spec;
}

Complex lorentzian(double freq_hz, const PeakModel& p) {
  return p.amplitude * std::exp(kI * p.phase_rad) /
         (p.decay_rate_per_s + kI * 2.0 * kPi * (freq_hz - p.center_hz));
}

std::vector<Complex> peak_superposition(const std::vector<double>& freqs_hz,
                                        const std::vector<PeakModel>& peaks) {
  std::vector<Complex> out(freqs_hz.size(), Complex{0.0, 0.0});
  for (const PeakModel& p : peaks) {
    for (size_t i = 0; i < freqs_hz.size(); ++i) {
      out[i] += lorentzian(freqs_hz[i], p);
    }
  }
  return out;
}

namespace {

constexpr int kParamsPerPeak = 4;  // center, decay, amplitude, phase

Eigen::VectorXd pack(const std::vector<PeakModel>& peaks) {
  Eigen::VectorXd x(kParamsPerPeak * static_cast<Eigen::Index>(peaks.size()));
  for (size_t p = 0; p < peaks.size(); ++p) {
    const auto o = kParamsPerPeak * static_cast<Eigen::Index>(p);
    x(o + 0) = peaks[p].center_hz;
    x(o + 1) = peaks[p].decay_rate_per_s;
    x(o + 2) = peaks[p].amplitude;
    x(o + 3) = peaks[p].phase_rad;
  }
  return x;
}

std::vector<PeakModel> unpack(const Eigen::VectorXd& x) {
  std::vector<PeakModel> peaks(static_cast<size_t>(x.size() / kParamsPerPeak));
  for (size_t p = 0; p < peaks.size(); ++p) {
    const auto o = kParamsPerPeak * static_cast<Eigen::Index>(p);
    peaks[p] = PeakModel{x(o + 0), x(o + 1), x(o + 2), x(o + 3)};
  }
  return peaks;
}

// Residual vector (real and imaginary parts interleaved by block).
Eigen::VectorXd residual(const Spectrum& spec, const Eigen::VectorXd& x) {
  const std::vector<Complex> model = peak_superposition(spec.freqs_hz, unpack(x));
  const auto n = static_cast<Eigen::Index>(spec.amps.size());
  Eigen::VectorXd r(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex d = spec.amps[static_cast<size_t>(i)] - model[static_cast<size_t>(i)];
    r(i) = d.real();
    r(n + i) = d.imag();
  }
  return r;
}

bool params_valid(const Eigen::VectorXd& x) {
  for (Eigen::Index p = 0; p < x.size() / kParamsPerPeak; ++p) {
    if (!(x(kParamsPerPeak * p + 1) > 1e-12)) return false;  // decay rate
  }
  return true;
}

}  // namespace

FitResult fit_calibration(const Spectrum& spec, const std::vector<PeakModel>& guesses) {
  if (guesses.empty()) {
    throw std::invalid_argument("fit_calibration: at least one guess required");
  }
  if (spec.freqs_hz.empty() || spec.freqs_hz.size() != spec.amps.size()) {
    throw std::invalid_argument("fit_calibration: malformed spectrum");
  }
  for (const PeakModel& g : guesses) {
    if (g.center_hz < spec.freqs_hz.front() || g.center_hz > spec.freqs_hz.back()) {
      std::ostringstream msg;
      msg << "fit_calibration: guess center " << g.center_hz
          << " Hz outside the spectral window [" << spec.freqs_hz.front() << ", "
          << spec.freqs_hz.back() << "]";
      throw std::invalid_argument(msg.str());
    }
  }

  Eigen::VectorXd x = pack(guesses);
  Eigen::VectorXd r = residual(spec, x);
  double objective = r.squaredNorm();
  Eigen::VectorXd best_x = x;
  double best_objective = objective;

  const Eigen::Index n_params = x.size();
  double mu = 1e-3;
  int consecutive_rejects = 0;
  int iter = 0;
  bool converged = objective == 0.0;

  for (; iter < 500 && !converged; ++iter) {
    // Forward-difference Jacobian.
    Eigen::MatrixXd jac(r.size(), n_params);
    for (Eigen::Index p = 0; p < n_params; ++p) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(p)));
      Eigen::VectorXd xp = x;
      xp(p) += h;
      jac.col(p) = (residual(spec, xp) - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += mu * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      const Eigen::VectorXd x_new = x + step;
      double objective_new = std::numeric_limits<double>::infinity();
      if (params_valid(x_new)) {
        objective_new = residual(spec, x_new).squaredNorm();
      }
      if (objective_new < objective) {
        const double decrease = (objective - objective_new) / std::max(objective, 1e-300);
        x = x_new;
        r = residual(spec, x);
        objective = objective_new;
        if (objective < best_objective) {
          best_objective = objective;
          best_x = x;
        }
        mu = std::max(mu / 3.0, 1e-12);
        consecutive_rejects = 0;
        accepted = true;
        if (decrease < 1e-10) converged = true;
      } else {
        mu *= 10.0;
        ++consecutive_rejects;
        if (consecutive_rejects >= 10) break;  // diverged
      }
    }
    if (consecutive_rejects >= 10) break;
  }

  FitResult result;
  result.peaks = unpack(best_x);
  for (PeakModel& p : result.peaks) {
    if (p.amplitude < 0.0) {
      p.amplitude = -p.amplitude;
      p.phase_rad += kPi;
    }
    p.phase_rad = std::remainder(p.phase_rad, 2.0 * kPi);
  }
  result.residual_norm = std::sqrt(best_objective);
  result.iterations = iter;
  result.converged = converged;
  return result;
}

DeconvolutionResult deconvolve(const Spectrum& spec, const std::vector<PeakModel>& peaks) {
  if (peaks.empty()) {
    throw std::invalid_argument("deconvolve: peak list must be non-empty");
  }
  const auto n = static_cast<Eigen::Index>(spec.amps.size());
  const auto p = static_cast<Eigen::Index>(peaks.size());
  ComplexMatrix design(n, p);
  for (Eigen::Index q = 0; q < p; ++q) {
    PeakModel unit = peaks[static_cast<size_t>(q)];
    unit.amplitude = 1.0;
    unit.phase_rad = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      design(i, q) = lorentzian(spec.freqs_hz[static_cast<size_t>(i)], unit);
    }
  }
  Eigen::VectorXcd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = spec.amps[static_cast<size_t>(i)];

  Eigen::JacobiSVD<ComplexMatrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(p - 1);
  const double condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 1e-12 * smax)) {
    std::ostringstream msg;
    msg << "deconvolve: peak design matrix is rank deficient (condition number " << condition
        << ")";
    throw std::runtime_error(msg.str());
  }
  const Eigen::VectorXcd c = svd.solve(b);

  DeconvolutionResult result;
  result.coefficients.assign(c.data(), c.data() + c.size());
  result.residual_norm = (design * c - b).norm();
  result.condition_number = condition;
  return result;
}

std::vector<PeakModel> calibration_peaks(const Molecule& m, Channel channel) {
  const std::vector<int> spins = m.channel_spins(channel);
  if (spins.empty()) {
    throw std::invalid_argument("calibration_peaks: channel " + channel_name(channel) +
                                " has no spins");
  }
  const EigenSystem sys = hermitian_eig(effective_hamiltonian(m));
  const Eigen::Index dim = sys.eigenvalues.size();

  std::vector<PeakModel> peaks;
  for (int k : spins) {
    const ComplexMatrix d_eig =
        sys.eigenvectors.adjoint() * detection_operator(k, m.n_spins()) * sys.eigenvectors;
    const double element_scale = d_eig.cwiseAbs().maxCoeff();
    const double decay = 1.0 / m.spins[static_cast<size_t>(k)].t2star_s;
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) {
        if (std::abs(d_eig(b, a)) <= 1e-9 * element_scale) continue;
        const double freq = -(sys.eigenvalues(a) - sys.eigenvalues(b)) / (2.0 * kPi);
        const bool known = std::any_of(peaks.begin(), peaks.end(), [&](const PeakModel& p) {
          return std::abs(p.center_hz - freq) < 1e-6 &&
                 std::abs(p.decay_rate_per_s - decay) < 1e-12;
        });
        if (!known) peaks.push_back(PeakModel{freq, decay, 1.0, 0.0});
      }
    }
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const PeakModel& a, const PeakModel& b) { return a.center_hz < b.center_hz; });
  return peaks;
}

}  // namespace nmrqsim
