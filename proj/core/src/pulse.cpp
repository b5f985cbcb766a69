#include "nmrqsim/pulse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmrqsim {

namespace {

constexpr double kPi = std::numbers::pi;

ComplexMatrix axis_operator(PulseAxis a) {
  switch (a) {
    case PulseAxis::PlusX:
      return pauli(PauliAxis::X);
    case PulseAxis::MinusX:
      return -pauli(PauliAxis::X);
    case PulseAxis::PlusY:
      return pauli(PauliAxis::Y);
    case PulseAxis::MinusY:
      return -pauli(PauliAxis::Y);
  }
  throw std::logic_error("unreachable");
}

void check_pulse(const HardPulse& p) {
  if (!(p.angle_rad > -2.0 * kPi && p.angle_rad <= 2.0 * kPi)) {
    throw std::invalid_argument("pulse angle must lie in (-2*pi, 2*pi]");
  }
}

}  // namespace

std::string pulse_axis_name(PulseAxis a) {
  switch (a) {
    case PulseAxis::PlusX:
      return "+x";
    case PulseAxis::MinusX:
      return "-x";
    case PulseAxis::PlusY:
      return "+y";
    case PulseAxis::MinusY:
      return "-y";
  }
  throw std::logic_error("unreachable");
}

PulseAxis pulse_axis_from_name(const std::string& name) {
  if (name == "+x") return PulseAxis::PlusX;
  if (name == "-x") return PulseAxis::MinusX;
  if (name == "+y") return PulseAxis::PlusY;
  if (name == "-y") return PulseAxis::MinusY;
  throw std::invalid_argument("unknown pulse axis '" + name + "'");
}

std::vector<int> resolve_target(const std::string& target, const Molecule& m) {
  const int idx = m.spin_index(target);
  if (idx >= 0) return {idx};
  if (target == "H" || target == "C") {
    std::vector<int> spins = m.channel_spins(channel_from_name(target));
    if (!spins.empty()) return spins;
  }
  throw std::invalid_argument("pulse target '" + target +
                              "' matches no spin label or populated channel");
}

ComplexMatrix element_propagator(const PulseElement& e, const Molecule& m) {
  const int n = m.n_spins();
  if (const HardPulse* p = std::get_if<HardPulse>(&e)) {
    check_pulse(*p);
    const ComplexMatrix op = axis_operator(p->axis);
    ComplexMatrix gen = ComplexMatrix::Zero(m.dim(), m.dim());
    for (int s : resolve_target(p->target, m)) {
      gen += embed_single(op, s, n);
    }
    return expm_hermitian(gen, p->angle_rad / 2.0);
  }
  const Delay& d = std::get<Delay>(e);
  if (!(d.duration_s > 0.0)) {
    throw std::invalid_argument("delay duration must be positive");
  }
  return expm_hermitian(effective_hamiltonian(m), d.duration_s);
}

ComplexMatrix sequence_propagator(const PulseSequence& s, const Molecule& m) {
  ComplexMatrix u = ComplexMatrix::Identity(m.dim(), m.dim());
  for (const PulseElement& e : s.elements) {
    u = element_propagator(e, m) * u;
  }
  return u;
}

namespace {

// Phase-damping step in the computational basis: coherences between basis
// states decay with the combined rate of every spin whose bit differs.
void damp(ComplexMatrix& rho, double duration_s, const Molecule& m,
          NoiseConfig::T2Source source) {
  const int n = m.n_spins();
  const int dim = m.dim();
  std::vector<double> rate(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Spin& s = m.spins[static_cast<size_t>(k)];
    rate[static_cast<size_t>(k)] =
        1.0 / (source == NoiseConfig::T2Source::T2 ? s.t2_s : s.t2star_s);
  }
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if (r == c) continue;
      double total = 0.0;
      const int diff = r ^ c;
      for (int k = 0; k < n; ++k) {
        if ((diff >> (n - 1 - k)) & 1) total += rate[static_cast<size_t>(k)];
      }
      rho(r, c) *= std::exp(-duration_s * total);
    }
  }
}

}  // namespace

ComplexMatrix apply_sequence(const ComplexMatrix& rho, const PulseSequence& s,
                             const Molecule& m, const NoiseConfig& noise) {
  if (rho.rows() != m.dim() || rho.cols() != m.dim()) {
    throw std::invalid_argument("apply_sequence: state dimension does not match molecule");
  }
  if (!noise.enabled) {
    return conjugate(rho, sequence_propagator(s, m));
  }
  ComplexMatrix out = rho;
  for (const PulseElement& e : s.elements) {
    out = conjugate(out, element_propagator(e, m));
    if (const Delay* d = std::get_if<Delay>(&e)) {
      damp(out, d->duration_s, m, noise.t2_source);
    }
  }
  return out;
}

double total_duration(const PulseSequence& s) {
  double t = 0.0;
  for (const PulseElement& e : s.elements) {
    if (const Delay* d = std::get_if<Delay>(&e)) t += d->duration_s;
  }
  return t;
}

}  // namespace nmrqsim
