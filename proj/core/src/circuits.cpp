#include "nmrqsim/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nmrqsim/constants.hpp"

namespace nmrqsim {

namespace {

constexpr double kPi = std::numbers::pi;

void check_spin(int spin, int n_spins, const char* what) {
  if (spin < 0 || spin >= n_spins) {
    std::ostringstream msg;
    msg << what << ": spin index " << spin << " out of range for " << n_spins << " spins";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ComplexMatrix gate_unitary(const Gate& g, int n_spins) {
  if (const RxGate* rx = std::get_if<RxGate>(&g)) {
    check_spin(rx->spin, n_spins, "Rx");
    return expm_hermitian(embed_single(pauli(PauliAxis::X), rx->spin, n_spins),
                          rx->angle_rad / 2.0);
  }
  if (const RyGate* ry = std::get_if<RyGate>(&g)) {
    check_spin(ry->spin, n_spins, "Ry");
    return expm_hermitian(embed_single(pauli(PauliAxis::Y), ry->spin, n_spins),
                          ry->angle_rad / 2.0);
  }
  if (const RzGate* rz = std::get_if<RzGate>(&g)) {
    check_spin(rz->spin, n_spins, "Rz");
    return expm_hermitian(embed_single(pauli(PauliAxis::Z), rz->spin, n_spins),
                          rz->angle_rad / 2.0);
  }
  const CnotGate& cx = std::get<CnotGate>(g);
  check_spin(cx.control, n_spins, "CNOT control");
  check_spin(cx.target, n_spins, "CNOT target");
  if (cx.control == cx.target) {
    throw std::invalid_argument("CNOT control and target must differ");
  }
  const int dim = 1 << n_spins;
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const int cbit = (col >> (n_spins - 1 - cx.control)) & 1;
    int row = col;
    if (cbit == 1) row = col ^ (1 << (n_spins - 1 - cx.target));
    u(row, col) = 1.0;
  }
  return u;
}

ComplexMatrix circuit_unitary(const Circuit& c) {
  const int dim = 1 << c.n_spins;
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (const Gate& g : c.gates) {
    u = gate_unitary(g, c.n_spins) * u;
  }
  return u;
}

Circuit ghz_circuit() {
  return Circuit{3, {RyGate{0, kPi / 2.0}, CnotGate{0, 1}, CnotGate{1, 2}}};
}

Circuit ghz_circuit_star() {
  return Circuit{3, {RyGate{0, kPi / 2.0}, CnotGate{0, 1}, CnotGate{0, 2}}};
}

ComplexVector ghz_target_state() {
  ComplexVector v = ComplexVector::Zero(8);
  v(0) = v(7) = 1.0 / std::sqrt(2.0);
  return v;
}

namespace {

// Compiler state: emitted elements plus one pending (virtual) z-angle per
// spin. A pending z commutes through delays and through pulses on other
// spins; commuting it past a pi pulse on its own spin flips its sign.
struct Emitter {
  const Molecule& mol;
  CompileOptions::RzMode rz_mode;
  std::vector<PulseElement> out;
  std::vector<double> pending;

  explicit Emitter(const Molecule& m, CompileOptions::RzMode mode)
      : mol(m), rz_mode(mode), pending(static_cast<size_t>(m.n_spins()), 0.0) {}

  const std::string& label(int spin) const {
    return mol.spins[static_cast<size_t>(spin)].label;
  }

  static double wrap(double angle) {
    double a = std::remainder(angle, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
  }

  // Rz(theta) as x/y pulses: temporally Rx(-pi/2), Ry(theta), Rx(pi/2).
  void emit_composite_z(int spin, double theta) {
    const double a = wrap(theta);
    if (std::abs(a) < 1e-12) return;
    out.push_back(HardPulse{label(spin), PulseAxis::MinusX, kPi / 2.0});
    out.push_back(HardPulse{label(spin), PulseAxis::PlusY, a});
    out.push_back(HardPulse{label(spin), PulseAxis::PlusX, kPi / 2.0});
  }

  void add_z(int spin, double theta) {
    if (rz_mode == CompileOptions::RzMode::Composite) {
      emit_composite_z(spin, theta);
    } else {
      pending[static_cast<size_t>(spin)] += theta;
    }
  }

  void flush_z(int spin) {
    double& p = pending[static_cast<size_t>(spin)];
    if (std::abs(wrap(p)) >= 1e-12) emit_composite_z(spin, p);
    p = 0.0;
  }

  void gate_pulse(int spin, PulseAxis axis, double angle) {
    flush_z(spin);
    out.push_back(HardPulse{label(spin), axis, wrap_pulse(angle)});
  }

  // Pulse angles live in (-2pi, 2pi]; fold the 4pi period and accept the
  // global sign this may introduce.
  static double wrap_pulse(double angle) {
    double a = std::remainder(angle, 4.0 * kPi);
    if (a <= -2.0 * kPi) a += 4.0 * kPi;
    if (a > 2.0 * kPi) a -= 4.0 * kPi;
    return a;
  }

  void echo_pulse(int spin) {
    out.push_back(HardPulse{label(spin), PulseAxis::PlusX, kPi});
    pending[static_cast<size_t>(spin)] = -pending[static_cast<size_t>(spin)];
  }

  void finish() {
    for (int s = 0; s < mol.n_spins(); ++s) flush_z(s);
  }
};

struct CnotPlan {
  int control = 0;
  int target = 0;
  double j_hz = 0.0;
  double delay_s = 0.0;  // full coupling delay (split around the echo)
};

CnotPlan plan_cnot(const CnotGate& g, const Molecule& m) {
  const std::string& ca = m.spins[static_cast<size_t>(g.control)].label;
  const std::string& tb = m.spins[static_cast<size_t>(g.target)].label;
  const Coupling* c = m.find_coupling(ca, tb);
  if (c == nullptr) {
    throw std::invalid_argument("CNOT(" + ca + ", " + tb + "): no coupling between the pair");
  }
  if (!(c->j_hz > 0.0)) {
    throw std::invalid_argument("CNOT(" + ca + ", " + tb + "): coupling J must be positive");
  }
  return CnotPlan{g.control, g.target, c->j_hz, 1.0 / (2.0 * c->j_hz)};
}

void emit_cnot(Emitter& em, const CnotPlan& plan, const Molecule& m) {
  const int n = m.n_spins();
  em.gate_pulse(plan.target, PulseAxis::PlusY, kPi / 2.0);
  em.out.push_back(Delay{plan.delay_s / 2.0});
  for (int s = 0; s < n; ++s) {
    if (s != plan.control && s != plan.target) em.echo_pulse(s);
  }
  em.out.push_back(Delay{plan.delay_s / 2.0});
  for (int s = 0; s < n; ++s) {
    if (s != plan.control && s != plan.target) em.echo_pulse(s);
  }
  // The active pair's offsets precess freely during the delay
  // (exp(+i pi d tau sigma_z) per spin) and are undone by z-corrections. The
  // target's correction must act before its final x pulse, which the pending
  // z machinery places automatically; the control keeps no pulses, so its
  // correction rides to the end of the sequence.
  const double comp_c =
      2.0 * kPi * m.spins[static_cast<size_t>(plan.control)].offset_hz * plan.delay_s;
  const double comp_t =
      2.0 * kPi * m.spins[static_cast<size_t>(plan.target)].offset_hz * plan.delay_s;
  em.add_z(plan.target, comp_t);
  em.gate_pulse(plan.target, PulseAxis::PlusX, kPi / 2.0);
  // Local corrections of the construction itself: Rz(pi/2) on the control,
  // Rz(-pi/2) on the target.
  em.add_z(plan.control, kPi / 2.0 + comp_c);
  em.add_z(plan.target, -kPi / 2.0);
}

PulseSequence compile_with_delays(const Circuit& c, const Molecule& m,
                                  const CompileOptions& options,
                                  const std::vector<double>& cnot_delays) {
  Emitter em(m, options.rz_mode);
  size_t cnot_index = 0;
  for (const Gate& g : c.gates) {
    if (const RxGate* rx = std::get_if<RxGate>(&g)) {
      em.gate_pulse(rx->spin, PulseAxis::PlusX, rx->angle_rad);
    } else if (const RyGate* ry = std::get_if<RyGate>(&g)) {
      em.gate_pulse(ry->spin, PulseAxis::PlusY, ry->angle_rad);
    } else if (const RzGate* rz = std::get_if<RzGate>(&g)) {
      em.add_z(rz->spin, rz->angle_rad);
    } else {
      CnotPlan plan = plan_cnot(std::get<CnotGate>(g), m);
      plan.delay_s = cnot_delays[cnot_index++];
      emit_cnot(em, plan, m);
    }
  }
  em.finish();
  return PulseSequence{std::move(em.out)};
}

std::vector<double> nominal_cnot_delays(const Circuit& c, const Molecule& m) {
  std::vector<double> delays;
  for (const Gate& g : c.gates) {
    if (const CnotGate* cx = std::get_if<CnotGate>(&g)) {
      delays.push_back(plan_cnot(*cx, m).delay_s);
    }
  }
  return delays;
}

bool cnot_touches_isotropic(const CnotGate& g, const Molecule& m) {
  const auto& active_a = m.spins[static_cast<size_t>(g.control)].label;
  const auto& active_b = m.spins[static_cast<size_t>(g.target)].label;
  for (const Coupling& c : m.couplings) {
    if (c.form != CouplingForm::Isotropic) continue;
    const bool touches_a = c.spin_a == active_a || c.spin_b == active_a;
    const bool touches_b = c.spin_a == active_b || c.spin_b == active_b;
    if (touches_a || touches_b) return true;
  }
  return false;
}

}  // namespace

PulseSequence compile_to_pulses(const Circuit& c, const Molecule& m,
                                const CompileOptions& options) {
  if (c.n_spins != m.n_spins()) {
    throw std::invalid_argument("compile_to_pulses: circuit and molecule spin counts differ");
  }
  std::vector<double> delays = nominal_cnot_delays(c, m);
  if (!options.optimize_isotropic_delays) {
    return compile_with_delays(c, m, options, delays);
  }

  // Deterministic per-delay tuning: scan a window around the nominal delay
  // and refine the best bracket, minimizing the full-sequence distance.
  const ComplexMatrix u_circuit = circuit_unitary(c);
  std::vector<size_t> tunable;
  {
    size_t idx = 0;
    for (const Gate& g : c.gates) {
      if (const CnotGate* cx = std::get_if<CnotGate>(&g)) {
        if (cnot_touches_isotropic(*cx, m)) tunable.push_back(idx);
        ++idx;
      }
    }
  }
  if (tunable.empty()) {
    return compile_with_delays(c, m, options, delays);
  }
  auto objective = [&](const std::vector<double>& d) {
    const PulseSequence seq = compile_with_delays(c, m, options, d);
    return distance_up_to_phase(sequence_propagator(seq, m), u_circuit,
                                PhaseMode::GlobalAndLocalZ);
  };
  for (int pass = 0; pass < 2; ++pass) {
    for (size_t t : tunable) {
      const double nominal = nominal_cnot_delays(c, m)[t];
      const double lo = options.delay_window_min * nominal;
      const double hi = options.delay_window_max * nominal;
      constexpr int kSamples = 192;
      double best_tau = delays[t];
      double best_f = objective(delays);
      for (int i = 0; i <= kSamples; ++i) {
        std::vector<double> d = delays;
        d[t] = lo + (hi - lo) * i / kSamples;
        const double f = objective(d);
        if (f < best_f) {
          best_f = f;
          best_tau = d[t];
        }
      }
      // Golden-section refinement around the winning sample.
      double a = std::max(lo, best_tau - (hi - lo) / kSamples);
      double b = std::min(hi, best_tau + (hi - lo) / kSamples);
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      auto eval = [&](double tau) {
        std::vector<double> d = delays;
        d[t] = tau;
        return objective(d);
      };
      double f1 = eval(x1), f2 = eval(x2);
      for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = eval(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = eval(x2);
        }
      }
      const double refined = f1 < f2 ? x1 : x2;
      if (eval(refined) < best_f) best_tau = refined;
      delays[t] = best_tau;
    }
    if (tunable.size() < 2) break;
  }
  return compile_with_delays(c, m, options, delays);
}

double default_verify_threshold(const Circuit& c, const Molecule& m) {
  for (const Gate& g : c.gates) {
    if (const CnotGate* cx = std::get_if<CnotGate>(&g)) {
      if (cnot_touches_isotropic(*cx, m)) return 0.05;
    }
  }
  return 1e-8;
}

VerificationResult verify_compilation(const Circuit& c, const PulseSequence& s,
                                      const Molecule& m, PhaseMode mode, double threshold) {
  const ComplexMatrix u_circuit = circuit_unitary(c);
  const ComplexMatrix u_pulses = sequence_propagator(s, m);
  VerificationResult r;
  r.distance = distance_up_to_phase(u_pulses, u_circuit, mode);
  const ComplexVector from_ground_circuit = u_circuit.col(0);
  const ComplexVector from_ground_pulses = u_pulses.col(0);
  r.state_overlap = std::abs(from_ground_circuit.dot(from_ground_pulses));
  r.pass = r.distance < threshold;
  if (mode == PhaseMode::GlobalAndLocalZ) {
    // Local z freedom is only admissible when it acts trivially on |0..0>;
    // scale the overlap gate with the distance budget.
    const double overlap_gate =
        1.0 - std::max(tol::kStateOverlap, threshold * threshold / 2.0);
    r.pass = r.pass && r.state_overlap > overlap_gate;
  }
  return r;
}

}  // namespace nmrqsim
