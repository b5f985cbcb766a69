#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nmrqsim/molecule.hpp"
#include "nmrqsim/qops.hpp"

namespace nmrqsim {

enum class PulseAxis { PlusX, MinusX, PlusY, MinusY };

std::string pulse_axis_name(PulseAxis a);
PulseAxis pulse_axis_from_name(const std::string& name);

// Instantaneous rotation exp(-i (angle/2) sum_s sigma_axis^(s)) over every
// spin the target resolves to. A target naming a spin label rotates that
// spin only (idealized selective pulse); a channel name hits every spin on
// the channel (non-selective pulse).
struct HardPulse {
  std::string target;
  PulseAxis axis = PulseAxis::PlusX;
  double angle_rad = 0.0;  // in (-2*pi, 2*pi]
};

struct Delay {
  double duration_s = 0.0;  // > 0
};

using PulseElement = std::variant<HardPulse, Delay>;

struct PulseSequence {
  std::vector<PulseElement> elements;
};

struct NoiseConfig {
  enum class T2Source { T2, T2Star };
  bool enabled = false;
  T2Source t2_source = T2Source::T2;
};

/// Spin indices a pulse target resolves to (label first, then channel name).
std::vector<int> resolve_target(const std::string& target, const Molecule& m);

ComplexMatrix element_propagator(const PulseElement& e, const Molecule& m);

/// Ordered product; the first element acts first: U = U_n ... U_1.
ComplexMatrix sequence_propagator(const PulseSequence& s, const Molecule& m);

// Evolves rho through the sequence. With noise disabled this is conjugation
// by the sequence propagator. With noise enabled pulses stay ideal and every
// delay is followed by a phase-damping step: the (r, c) entry is scaled by
// exp(-t / T2_k) for each spin k whose basis bit differs between r and c.
ComplexMatrix apply_sequence(const ComplexMatrix& rho, const PulseSequence& s,
                             const Molecule& m, const NoiseConfig& noise);

/// Sum of delay durations (pulses are instantaneous).
double total_duration(const PulseSequence& s);

}  // namespace nmrqsim
