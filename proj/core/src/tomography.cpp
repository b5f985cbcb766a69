#include "nmrqsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nmrqsim {

namespace {

constexpr double kPi = std::numbers::pi;

PauliAxis axis_of(char c) {
  switch (c) {
    case 'I':
      return PauliAxis::I;
    case 'X':
      return PauliAxis::X;
    case 'Y':
      return PauliAxis::Y;
    case 'Z':
      return PauliAxis::Z;
    default:
      throw std::invalid_argument("unknown Pauli letter");
  }
}

}  // namespace

std::vector<std::string> pauli_basis_labels(int n_spins) {
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> labels;
  const int count = 1 << (2 * n_spins);  // 4^n
  for (int code = 1; code < count; ++code) {
    std::string label(static_cast<size_t>(n_spins), 'I');
    int c = code;
    for (int k = n_spins - 1; k >= 0; --k) {
      label[static_cast<size_t>(k)] = letters[c % 4];
      c /= 4;
    }
    labels.push_back(label);
  }
  return labels;
}

std::vector<ComplexMatrix> pauli_basis(int n_spins) {
  const double norm = std::sqrt(static_cast<double>(1 << n_spins));
  std::vector<ComplexMatrix> ops;
  for (const std::string& label : pauli_basis_labels(n_spins)) {
    ComplexMatrix op = ComplexMatrix::Identity(1, 1);
    for (char c : label) {
      op = tensor(op, pauli(axis_of(c)));
    }
    ops.push_back(op / norm);
  }
  return ops;
}

namespace {

// Lorentzian basis with a precomputed SVD, shared across many deconvolutions.
struct ChannelSolver {
  Eigen::JacobiSVD<ComplexMatrix> svd;
  Eigen::Index n_peaks = 0;
  double condition = 0.0;

  ChannelSolver(const std::vector<double>& freqs, const std::vector<PeakModel>& peaks) {
    const auto n = static_cast<Eigen::Index>(freqs.size());
    n_peaks = static_cast<Eigen::Index>(peaks.size());
    ComplexMatrix design(n, n_peaks);
    for (Eigen::Index q = 0; q < n_peaks; ++q) {
      PeakModel unit = peaks[static_cast<size_t>(q)];
      unit.amplitude = 1.0;
      unit.phase_rad = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        design(i, q) = lorentzian(freqs[static_cast<size_t>(i)], unit);
      }
    }
    svd.compute(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n_peaks - 1);
    condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(smin > 1e-12 * smax)) {
      std::ostringstream msg;
      msg << "tomography: peak design matrix is rank deficient (condition " << condition << ")";
      throw std::runtime_error(msg.str());
    }
  }

  Eigen::VectorXcd solve(const std::vector<Complex>& amps) const {
    Eigen::Map<const Eigen::VectorXcd> b(amps.data(),
                                         static_cast<Eigen::Index>(amps.size()));
    return svd.solve(b);
  }
};

struct AcquisitionContext {
  const Molecule& mol;
  Acquisition acq;
  std::map<Channel, std::vector<PeakModel>> peaks;
  std::map<Channel, ChannelSolver> solvers;

  AcquisitionContext(const Molecule& m, const std::map<Channel, std::vector<PeakModel>>& pk,
                     const Acquisition& a)
      : mol(m), acq(a), peaks(pk) {
    for (const auto& [channel, list] : peaks) {
      if (list.empty()) {
        throw std::invalid_argument("tomography: empty calibration peak list for channel " +
                                    channel_name(channel));
      }
      // Grid frequencies are fixed by the acquisition parameters alone.
      Fid probe;
      probe.channel = channel;
      probe.dwell_s = acq.dwell_s;
      probe.samples.assign(static_cast<size_t>(acq.n_samples), Complex{0.0, 0.0});
      const Spectrum empty = fourier(probe);
      solvers.emplace(channel, ChannelSolver(empty.freqs_hz, list));
    }
  }

  // One acquisition: reading pulses, FID, spectrum, deconvolution.
  Eigen::VectorXcd acquire(const ComplexMatrix& rho, const PlanEntry& entry, Channel channel,
                           double noise_rel_sigma, NoiseSource* noise) const {
    const ComplexMatrix rotated =
        conjugate(rho, sequence_propagator(entry.reading_pulses, mol));
    const Fid fid =
        synthesize_fid(rotated, mol, channel, acq.duration_s(), acq.dwell_s);
    Spectrum spec = fourier(fid);
    if (noise_rel_sigma > 0.0 && noise != nullptr) {
      double peak = 0.0;
      for (const Complex& a : spec.amps) peak = std::max(peak, std::abs(a));
      const double sigma = noise_rel_sigma * peak;
      for (Complex& a : spec.amps) {
        a += Complex{sigma * noise->normal(), sigma * noise->normal()};
      }
    }
    return solvers.at(channel).solve(spec.amps);
  }
};

void check_plan(const TomographyPlan& plan) {
  for (const PlanEntry& e : plan.entries) {
    for (const PulseElement& el : e.reading_pulses.elements) {
      if (!std::holds_alternative<HardPulse>(el)) {
        throw std::invalid_argument("tomography plan entries may contain pulses only");
      }
    }
    if (e.channels.empty()) {
      throw std::invalid_argument("tomography plan entry reads no channel");
    }
  }
}

Eigen::MatrixXcd assemble_entries(const TomographyPlan& plan, const AcquisitionContext& ctx,
                                  const std::vector<ComplexMatrix>& basis,
                                  std::vector<MeasurementMatrix::RowKey>* keys) {
  Eigen::Index n_rows = 0;
  for (size_t e = 0; e < plan.entries.size(); ++e) {
    for (Channel ch : plan.entries[e].channels) {
      n_rows += static_cast<Eigen::Index>(ctx.peaks.at(ch).size());
    }
  }
  Eigen::MatrixXcd mat(n_rows, static_cast<Eigen::Index>(basis.size()));
  if (keys) keys->clear();
  for (size_t j = 0; j < basis.size(); ++j) {
    Eigen::Index row = 0;
    for (size_t e = 0; e < plan.entries.size(); ++e) {
      for (Channel ch : plan.entries[e].channels) {
        const Eigen::VectorXcd coeffs =
            ctx.acquire(basis[j], plan.entries[e], ch, 0.0, nullptr);
        mat.block(row, static_cast<Eigen::Index>(j), coeffs.size(), 1) = coeffs;
        if (keys && j == 0) {
          for (Eigen::Index p = 0; p < coeffs.size(); ++p) {
            keys->push_back({static_cast<int>(e), ch, static_cast<int>(p)});
          }
        }
        row += coeffs.size();
      }
    }
  }
  return mat;
}

Eigen::Index matrix_rank(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  }
  return rank;
}

}  // namespace

TomographyPlan default_plan(const Molecule& m, const Acquisition& acq) {
  std::map<Channel, std::vector<PeakModel>> peaks;
  peaks[Channel::H] = calibration_peaks(m, Channel::H);
  peaks[Channel::C] = calibration_peaks(m, Channel::C);
  AcquisitionContext ctx(m, peaks, acq);
  const std::vector<ComplexMatrix> basis = pauli_basis(m.n_spins());
  const Eigen::Index full_rank = static_cast<Eigen::Index>(basis.size());

  // Candidate pool: every per-spin combination of {identity, 90x, 90y},
  // enumerated with spin 0 as the most significant digit.
  const int n = m.n_spins();
  int pool_size = 1;
  for (int k = 0; k < n; ++k) pool_size *= 3;
  std::vector<PlanEntry> pool;
  for (int code = 0; code < pool_size; ++code) {
    PlanEntry entry;
    entry.channels = {Channel::H, Channel::C};
    int c = code;
    std::vector<int> digits(static_cast<size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
      digits[static_cast<size_t>(k)] = c % 3;
      c /= 3;
    }
    for (int k = 0; k < n; ++k) {
      const int d = digits[static_cast<size_t>(k)];
      if (d == 0) continue;
      entry.reading_pulses.elements.push_back(
          HardPulse{m.spins[static_cast<size_t>(k)].label,
                    d == 1 ? PulseAxis::PlusX : PulseAxis::PlusY, kPi / 2.0});
    }
    pool.push_back(std::move(entry));
  }

  constexpr int kPlanSize = 12;
  std::vector<bool> used(pool.size(), false);
  TomographyPlan plan;
  Eigen::MatrixXcd selected_rows(0, full_rank);
  Eigen::Index rank = 0;
  while (static_cast<int>(plan.entries.size()) < kPlanSize && rank < full_rank) {
    int best = -1;
    Eigen::Index best_rank = rank;
    for (size_t cand = 0; cand < pool.size(); ++cand) {
      if (used[cand]) continue;
      TomographyPlan probe;
      probe.entries = {pool[cand]};
      const Eigen::MatrixXcd rows = assemble_entries(probe, ctx, basis, nullptr);
      Eigen::MatrixXcd stacked(selected_rows.rows() + rows.rows(), full_rank);
      stacked << selected_rows, rows;
      const Eigen::Index r = matrix_rank(stacked);
      if (r > best_rank) {
        best_rank = r;
        best = static_cast<int>(cand);
      }
    }
    if (best < 0) break;  // no candidate adds rank
    used[static_cast<size_t>(best)] = true;
    TomographyPlan probe;
    probe.entries = {pool[static_cast<size_t>(best)]};
    const Eigen::MatrixXcd rows = assemble_entries(probe, ctx, basis, nullptr);
    Eigen::MatrixXcd stacked(selected_rows.rows() + rows.rows(), full_rank);
    stacked << selected_rows, rows;
    selected_rows = std::move(stacked);
    rank = best_rank;
    plan.entries.push_back(pool[static_cast<size_t>(best)]);
  }
  // Pad with unused candidates in pool order.
  for (size_t cand = 0; cand < pool.size() && static_cast<int>(plan.entries.size()) < kPlanSize;
       ++cand) {
    if (!used[cand]) {
      used[cand] = true;
      plan.entries.push_back(pool[cand]);
    }
  }
  if (rank < full_rank) {
    std::ostringstream msg;
    msg << "default_plan: " << kPlanSize << " entries reach rank " << rank << " of "
        << full_rank << " for this molecule";
    throw std::runtime_error(msg.str());
  }
  return plan;
}

MeasurementMatrix assemble_measurement_matrix(
    const TomographyPlan& plan, const Molecule& m,
    const std::map<Channel, std::vector<PeakModel>>& peaks, const Acquisition& acq) {
  check_plan(plan);
  AcquisitionContext ctx(m, peaks, acq);
  const std::vector<ComplexMatrix> basis = pauli_basis(m.n_spins());

  MeasurementMatrix mm;
  mm.basis = pauli_basis_labels(m.n_spins());
  mm.peaks = peaks;
  mm.acquisition = acq;
  mm.entries = assemble_entries(plan, ctx, basis, &mm.rows);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mm.entries);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  mm.condition_number =
      smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  return mm;
}

double NoiseSource::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on mt19937_64 uniforms keeps the stream identical across
  // standard libraries.
  const double inv = 1.0 / (static_cast<double>(engine_.max()) + 1.0);
  double u1 = 0.0;
  do {
    u1 = (static_cast<double>(engine_()) + 0.5) * inv;
  } while (u1 <= 0.0);
  const double u2 = (static_cast<double>(engine_()) + 0.5) * inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

std::vector<Complex> observe(const ComplexMatrix& rho, const TomographyPlan& plan,
                             const Molecule& m, const MeasurementMatrix& mm,
                             double noise_rel_sigma, NoiseSource* noise) {
  check_plan(plan);
  AcquisitionContext ctx(m, mm.peaks, mm.acquisition);
  std::vector<Complex> observed;
  for (const PlanEntry& entry : plan.entries) {
    for (Channel ch : entry.channels) {
      const Eigen::VectorXcd coeffs = ctx.acquire(rho, entry, ch, noise_rel_sigma, noise);
      observed.insert(observed.end(), coeffs.data(), coeffs.data() + coeffs.size());
    }
  }
  return observed;
}

Reconstruction reconstruct(const std::vector<Complex>& observed, const MeasurementMatrix& mm) {
  if (static_cast<Eigen::Index>(observed.size()) != mm.entries.rows()) {
    std::ostringstream msg;
    msg << "reconstruct: " << observed.size() << " observations for " << mm.entries.rows()
        << " matrix rows";
    throw std::invalid_argument(msg.str());
  }
  Eigen::Map<const Eigen::VectorXcd> b(observed.data(),
                                       static_cast<Eigen::Index>(observed.size()));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mm.entries,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXcd c = svd.solve(b);

  const int n_spins = static_cast<int>(mm.basis.empty() ? 0 : mm.basis[0].size());
  const std::vector<ComplexMatrix> basis = pauli_basis(n_spins);
  ComplexMatrix rho = ComplexMatrix::Zero(1 << n_spins, 1 << n_spins);
  for (size_t j = 0; j < basis.size(); ++j) {
    rho += c(static_cast<Eigen::Index>(j)) * basis[j];
  }

  Reconstruction rec;
  rec.coefficients = c;
  rec.anti_hermitian_residual = ((rho - rho.adjoint()) / 2.0).cwiseAbs().maxCoeff();
  rec.rho = (rho + rho.adjoint()) / 2.0;
  const Eigen::VectorXcd fit = mm.entries * c;
  rec.lsq_residual = (fit - b).norm();

  // Group residuals by acquisition (entry, channel).
  size_t row = 0;
  while (row < mm.rows.size()) {
    size_t end = row;
    while (end < mm.rows.size() && mm.rows[end].entry_index == mm.rows[row].entry_index &&
           mm.rows[end].channel == mm.rows[row].channel) {
      ++end;
    }
    double acc = 0.0;
    for (size_t i = row; i < end; ++i) {
      acc += std::norm(fit(static_cast<Eigen::Index>(i)) - b(static_cast<Eigen::Index>(i)));
    }
    rec.per_acquisition_residuals.push_back(std::sqrt(acc));
    row = end;
  }
  return rec;
}

double fidelity(const ComplexMatrix& rho, const ComplexVector& target) {
  if (rho.rows() != target.size() || rho.cols() != target.size()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > 1e-6) {
    std::cerr << "fidelity: warning, tr(rho) = " << trace << " (expected 1)\n";
  }
  const Complex value = target.dot(rho * target);  // <target| rho |target>
  if (std::abs(value.imag()) > 1e-9) {
    std::ostringstream msg;
    msg << "fidelity: quadratic form has imaginary part " << value.imag()
        << "; state is not Hermitian enough";
    throw std::runtime_error(msg.str());
  }
  return value.real();
}

MerminCorrelators mermin_correlators(const ComplexMatrix& rho) {
  if (rho.rows() != 8 || rho.cols() != 8) {
    throw std::invalid_argument("mermin_correlators: need a 3-spin state");
  }
  auto expect = [&](PauliAxis a, PauliAxis b, PauliAxis c) {
    const ComplexMatrix op = tensor(tensor(pauli(a), pauli(b)), pauli(c));
    return (rho * op).trace().real();
  };
  MerminCorrelators mc;
  mc.xxx = expect(PauliAxis::X, PauliAxis::X, PauliAxis::X);
  mc.xyy = expect(PauliAxis::X, PauliAxis::Y, PauliAxis::Y);
  mc.yxy = expect(PauliAxis::Y, PauliAxis::X, PauliAxis::Y);
  mc.yyx = expect(PauliAxis::Y, PauliAxis::Y, PauliAxis::X);
  return mc;
}

}  // namespace nmrqsim
