#pragma once

#include <string>
#include <vector>

#include "nmrqsim/qops.hpp"

namespace nmrqsim {

enum class Channel { H, C };

std::string channel_name(Channel c);
Channel channel_from_name(const std::string& name);

struct Spin {
  std::string label;
  Channel channel = Channel::H;
  double offset_hz = 0.0;   // Larmor frequency minus the channel reference
  double t1_s = 0.0;
  double t2_s = 0.0;
  double t2star_s = 0.0;
};

enum class CouplingForm { SecularZZ, Isotropic };

struct Coupling {
  std::string spin_a;
  std::string spin_b;
  double j_hz = 0.0;
  CouplingForm form = CouplingForm::SecularZZ;
};

// Spin roster plus coupling table. The spin order fixes tensor-factor
// positions for every operator built from the molecule.
struct Molecule {
  std::vector<Spin> spins;
  std::vector<Coupling> couplings;

  int n_spins() const { return static_cast<int>(spins.size()); }
  int dim() const { return 1 << n_spins(); }
  /// Index of the spin with the given label; -1 if absent.
  int spin_index(const std::string& label) const;
  /// Indices of all spins on the given channel, in roster order.
  std::vector<int> channel_spins(Channel channel) const;
  const Coupling* find_coupling(const std::string& a, const std::string& b) const;

  /// Throws on structural problems (unresolved labels, duplicate pairs,
  /// non-positive times, t2 > 2*t1). Returns non-fatal physicality notes;
  /// in particular t2* > t2 is reported but tolerated because measured
  /// line-fit decay times can slightly exceed the quoted T2.
  std::vector<std::string> validate() const;
};

/// Trichloroethylene preset: spins (H, C1, C2) with the carbon channel
/// referenced at the mean carbon frequency, couplings H-C1 203 Hz (zz),
/// C1-C2 102 Hz (isotropic), H-C2 10 Hz (zz).
Molecule tce_preset();

/// Copy with every coupling forced to the secular-zz form.
Molecule secular_variant(const Molecule& m);

// Rotating-frame Hamiltonian in angular units (rad/s):
//   sum_k (-pi * offset_k) sigma_z^(k)
//   + sum_zz pairs (pi J / 2) sigma_z sigma_z
//   + sum_iso pairs (pi J / 2) (sigma_x sigma_x + sigma_y sigma_y + sigma_z sigma_z)
// so that exp(-i H t) is the free-evolution propagator and a spin with
// offset d produces a spectral line at +d Hz.
ComplexMatrix effective_hamiltonian(const Molecule& m);

}  // namespace nmrqsim
