#include "nmrqsim/molecule.hpp"

#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nmrqsim {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string channel_name(Channel c) {
  return c == Channel::H ? "H" : "C";
}

Channel channel_from_name(const std::string& name) {
  if (name == "H") return Channel::H;
  if (name == "C") return Channel::C;
  throw std::invalid_argument("unknown channel '" + name + "' (expected H or C)");
}

int Molecule::spin_index(const std::string& label) const {
  for (int i = 0; i < n_spins(); ++i) {
    if (spins[static_cast<size_t>(i)].label == label) return i;
  }
  return -1;
}

std::vector<int> Molecule::channel_spins(Channel channel) const {
  std::vector<int> out;
  for (int i = 0; i < n_spins(); ++i) {
    if (spins[static_cast<size_t>(i)].channel == channel) out.push_back(i);
  }
  return out;
}

const Coupling* Molecule::find_coupling(const std::string& a, const std::string& b) const {
  for (const Coupling& c : couplings) {
    if ((c.spin_a == a && c.spin_b == b) || (c.spin_a == b && c.spin_b == a)) return &c;
  }
  return nullptr;
}

std::vector<std::string> Molecule::validate() const {
  if (spins.empty() || spins.size() > 4) {
    throw std::invalid_argument("molecule must have between 1 and 4 spins");
  }
  std::set<std::string> labels;
  for (const Spin& s : spins) {
    if (s.label.empty()) throw std::invalid_argument("spin label must be non-empty");
    if (!labels.insert(s.label).second) {
      throw std::invalid_argument("duplicate spin label '" + s.label + "'");
    }
    if (s.t1_s <= 0 || s.t2_s <= 0 || s.t2star_s <= 0) {
      throw std::invalid_argument("spin '" + s.label + "': relaxation times must be positive");
    }
    if (s.t2_s > 2.0 * s.t1_s) {
      std::ostringstream msg;
      msg << "spin '" << s.label << "': t2 = " << s.t2_s << " s exceeds 2*t1 = " << 2.0 * s.t1_s
          << " s";
      throw std::invalid_argument(msg.str());
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (const Coupling& c : couplings) {
    if (spin_index(c.spin_a) < 0 || spin_index(c.spin_b) < 0) {
      throw std::invalid_argument("coupling references unknown spin '" +
                                  (spin_index(c.spin_a) < 0 ? c.spin_a : c.spin_b) + "'");
    }
    if (c.spin_a == c.spin_b) {
      throw std::invalid_argument("coupling must join two distinct spins");
    }
    auto key = c.spin_a < c.spin_b ? std::make_pair(c.spin_a, c.spin_b)
                                   : std::make_pair(c.spin_b, c.spin_a);
    if (!pairs.insert(key).second) {
      throw std::invalid_argument("duplicate coupling for pair (" + key.first + ", " +
                                  key.second + ")");
    }
  }
  std::vector<std::string> notes;
  for (const Spin& s : spins) {
    if (s.t2star_s > s.t2_s) {
      std::ostringstream msg;
      msg << "spin '" << s.label << "': t2* = " << s.t2star_s << " s exceeds t2 = " << s.t2_s
          << " s";
      notes.push_back(msg.str());
    }
  }
  return notes;
}

Molecule tce_preset() {
  Molecule m;
  m.spins = {
      {"H", Channel::H, 0.0, 7.0, 3.0, 0.51},
      {"C1", Channel::C, -325.0, 30.0, 0.4, 0.41},
      {"C2", Channel::C, 325.0, 30.0, 0.2, 0.23},
  };
  m.couplings = {
      {"H", "C1", 203.0, CouplingForm::SecularZZ},
      {"C1", "C2", 102.0, CouplingForm::Isotropic},
      {"H", "C2", 10.0, CouplingForm::SecularZZ},
  };
  return m;
}

Molecule secular_variant(const Molecule& m) {
  Molecule out = m;
  for (Coupling& c : out.couplings) c.form = CouplingForm::SecularZZ;
  return out;
}

ComplexMatrix effective_hamiltonian(const Molecule& m) {
  m.validate();
  const int n = m.n_spins();
  const int dim = m.dim();
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < n; ++k) {
    h += (-kPi * m.spins[static_cast<size_t>(k)].offset_hz) *
         embed_single(pauli(PauliAxis::Z), k, n);
  }
  for (const Coupling& c : m.couplings) {
    const int a = m.spin_index(c.spin_a);
    const int b = m.spin_index(c.spin_b);
    const double w = kPi * c.j_hz / 2.0;
    h += w * (embed_single(pauli(PauliAxis::Z), a, n) * embed_single(pauli(PauliAxis::Z), b, n));
    if (c.form == CouplingForm::Isotropic) {
      h += w * (embed_single(pauli(PauliAxis::X), a, n) *
                    embed_single(pauli(PauliAxis::X), b, n) +
                embed_single(pauli(PauliAxis::Y), a, n) *
                    embed_single(pauli(PauliAxis::Y), b, n));
    }
  }
  return h;
}

}  // namespace nmrqsim
