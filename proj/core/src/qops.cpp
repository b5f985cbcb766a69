#include "nmrqsim/qops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nmrqsim/constants.hpp"

namespace nmrqsim {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
}

}  // namespace

ComplexMatrix pauli(PauliAxis axis) {
  ComplexMatrix m(2, 2);
  switch (axis) {
    case PauliAxis::I:
      m << 1, 0, 0, 1;
      break;
    case PauliAxis::X:
      m << 0, 1, 1, 0;
      break;
    case PauliAxis::Y:
      m << 0, -kI, kI, 0;
      break;
    case PauliAxis::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix embed_single(const ComplexMatrix& op, int spin_index, int n_spins) {
  require_square(op, "embed_single");
  if (op.rows() != 2) {
    throw std::invalid_argument("embed_single: operator must be 2x2");
  }
  if (n_spins < 1 || n_spins > 4) {
    throw std::invalid_argument("embed_single: n_spins must be in [1,4]");
  }
  if (spin_index < 0 || spin_index >= n_spins) {
    std::ostringstream msg;
    msg << "embed_single: spin_index " << spin_index << " out of range for " << n_spins
        << " spins";
    throw std::invalid_argument(msg.str());
  }
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int k = 0; k < n_spins; ++k) {
    out = tensor(out, k == spin_index ? op : ComplexMatrix(ComplexMatrix::Identity(2, 2)));
  }
  return out;
}

ComplexVector basis_state(int dim, int index) {
  if (index < 0 || index >= dim) {
    throw std::invalid_argument("basis_state: index out of range");
  }
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

double max_hermitian_asymmetry(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
  return m.rows() == m.cols() && max_hermitian_asymmetry(m) <= tolerance;
}

bool is_unitary(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  ComplexMatrix d = m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols());
  return d.cwiseAbs().maxCoeff() <= tolerance;
}

EigenSystem hermitian_eig(const ComplexMatrix& m) {
  require_square(m, "hermitian_eig");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = max_hermitian_asymmetry(m);
  if (asym > tol::kHermitianInput * scale) {
    std::ostringstream msg;
    msg << "hermitian_eig: input is not Hermitian (max asymmetry " << asym << ", allowed "
        << tol::kHermitianInput * scale << ")";
    throw std::invalid_argument(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver((m + m.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }

  const Eigen::Index n = m.rows();
  EigenSystem sys;
  sys.eigenvalues.resize(n);
  sys.eigenvectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    sys.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }

  // Deterministic handling of degenerate clusters and vector phases.
  const double eig_scale = std::max(1.0, sys.eigenvalues.cwiseAbs().maxCoeff());
  const double cluster_tol = 1e-8 * eig_scale;
  auto first_significant = [](const ComplexVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-6) return i;
    }
    return Eigen::Index{0};
  };
  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo + 1;
    while (hi < n && sys.eigenvalues(lo) - sys.eigenvalues(hi) <= cluster_tol) ++hi;
    if (hi - lo > 1) {
      std::vector<Eigen::Index> order(hi - lo);
      for (Eigen::Index k = 0; k < hi - lo; ++k) order[k] = lo + k;
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) {
                         const Eigen::Index ia = first_significant(sys.eigenvectors.col(a));
                         const Eigen::Index ib = first_significant(sys.eigenvectors.col(b));
                         const double ma = std::abs(sys.eigenvectors(ia, a));
                         const double mb = std::abs(sys.eigenvectors(ib, b));
                         if (std::abs(ma - mb) > 1e-12) return ma > mb;
                         return ia < ib;
                       });
      ComplexMatrix block(n, hi - lo);
      for (Eigen::Index k = 0; k < hi - lo; ++k) block.col(k) = sys.eigenvectors.col(order[k]);
      sys.eigenvectors.middleCols(lo, hi - lo) = block;
    }
    lo = hi;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = first_significant(sys.eigenvectors.col(i));
    const Complex pivot = sys.eigenvectors(k, i);
    if (std::abs(pivot) > 0) {
      sys.eigenvectors.col(i) *= std::conj(pivot) / std::abs(pivot);
    }
  }
  return sys;
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
  EigenSystem sys = hermitian_eig(h);
  const Eigen::Index n = h.rows();
  ComplexVector phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases(i) = std::exp(-kI * sys.eigenvalues(i) * t);
  }
  return sys.eigenvectors * phases.asDiagonal() * sys.eigenvectors.adjoint();
}

ComplexMatrix conjugate(const ComplexMatrix& rho, const ComplexMatrix& u) {
  if (rho.rows() != u.rows() || rho.cols() != u.cols() || rho.rows() != rho.cols()) {
    throw std::invalid_argument("conjugate: dimension mismatch");
  }
  return u * rho * u.adjoint();
}

namespace {

int spin_count_for_dim(Eigen::Index dim) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim) {
    d *= 2;
    ++n;
  }
  if (d != dim) {
    throw std::invalid_argument("distance_up_to_phase: dimension is not a power of 2");
  }
  return n;
}

// ||u - exp(i*phi) * diag(z(theta)) * v||_max for the local-z product phases.
double phase_distance(const ComplexMatrix& u, const ComplexMatrix& v, double phi,
                      const std::vector<double>& theta, int n_spins) {
  const Eigen::Index dim = u.rows();
  ComplexVector row_phase(dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    double angle = phi;
    for (int k = 0; k < n_spins; ++k) {
      const int bit = static_cast<int>((r >> (n_spins - 1 - k)) & 1);
      angle += (bit == 0 ? -0.5 : 0.5) * theta[static_cast<size_t>(k)];
    }
    row_phase(r) = std::exp(kI * angle);
  }
  return (u - row_phase.asDiagonal() * v).cwiseAbs().maxCoeff();
}

// Coarse scan plus golden-section refinement of a 1-D phase objective.
template <typename F>
double minimize_angle(F objective, double lo, double hi) {
  constexpr int kCoarse = 64;
  double best_x = lo, best_f = objective(lo);
  for (int i = 1; i <= kCoarse; ++i) {
    const double x = lo + (hi - lo) * i / kCoarse;
    const double f = objective(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  const double step = (hi - lo) / kCoarse;
  double a = best_x - step, b = best_x + step;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = objective(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace

double distance_up_to_phase(const ComplexMatrix& u, const ComplexMatrix& v, PhaseMode mode) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw std::invalid_argument("distance_up_to_phase: dimension mismatch");
  }
  if (!is_unitary(u, 1e-9) || !is_unitary(v, 1e-9)) {
    throw std::invalid_argument("distance_up_to_phase: inputs must be unitary");
  }

  // Align the global phase on v's largest-magnitude entry.
  Eigen::Index ri = 0, ci = 0;
  v.cwiseAbs().maxCoeff(&ri, &ci);
  double phi = 0.0;
  if (std::abs(u(ri, ci)) > 0.0) {
    phi = std::arg(u(ri, ci) / v(ri, ci));
  }

  if (mode == PhaseMode::GlobalOnly) {
    return (u - std::exp(kI * phi) * v).cwiseAbs().maxCoeff();
  }

  const int n_spins = spin_count_for_dim(u.rows());
  std::vector<double> theta(static_cast<size_t>(n_spins), 0.0);
  constexpr double kPi = std::numbers::pi;
  double best = phase_distance(u, v, phi, theta, n_spins);
  for (int sweep = 0; sweep < 6; ++sweep) {
    phi = minimize_angle(
        [&](double x) { return phase_distance(u, v, x, theta, n_spins); }, phi - kPi, phi + kPi);
    for (int k = 0; k < n_spins; ++k) {
      const size_t ks = static_cast<size_t>(k);
      theta[ks] = minimize_angle(
          [&](double x) {
            std::vector<double> t = theta;
            t[ks] = x;
            return phase_distance(u, v, phi, t, n_spins);
          },
          theta[ks] - 2 * kPi, theta[ks] + 2 * kPi);
    }
    const double now = phase_distance(u, v, phi, theta, n_spins);
    if (best - now < 1e-14) {
      best = std::min(best, now);
      break;
    }
    best = now;
  }
  return best;
}

}  // namespace nmrqsim
