#include "nmrqsim/thermal.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nmrqsim {

DeviationMatrix thermal_deviation(const Molecule& m, const std::vector<double>& weights,
                                  double scale) {
  const int n = m.n_spins();
  if (static_cast<int>(weights.size()) != n) {
    std::ostringstream msg;
    msg << "thermal_deviation: " << weights.size() << " weights for " << n << " spins";
    throw std::invalid_argument(msg.str());
  }
  ComplexMatrix rho = ComplexMatrix::Zero(m.dim(), m.dim());
  for (int k = 0; k < n; ++k) {
    rho += scale * weights[static_cast<size_t>(k)] *
           embed_single(pauli(PauliAxis::Z), k, n);
  }
  return DeviationMatrix{std::move(rho), weights, scale};
}

DeviationMatrix thermal_deviation(const Molecule& m) {
  std::vector<double> weights;
  weights.reserve(m.spins.size());
  for (const Spin& s : m.spins) {
    weights.push_back(s.channel == Channel::H ? 4.0 : 1.0);
  }
  return thermal_deviation(m, weights, 4.0);
}

ComplexMatrix pseudo_pure(double p, int n_spins) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("pseudo_pure: p must lie in [0, 1]");
  }
  const int dim = 1 << n_spins;
  ComplexMatrix rho =
      ((1.0 - p) / dim) * ComplexMatrix::Identity(dim, dim);
  rho(0, 0) += p;
  return rho;
}

UnitarityDiagnostic unitarity_diagnostic(const DeviationMatrix& rho_in,
                                         const ComplexMatrix& rho_out) {
  if (rho_in.matrix.rows() != rho_out.rows()) {
    throw std::invalid_argument("unitarity_diagnostic: dimension mismatch");
  }
  UnitarityDiagnostic d;
  d.eigs_in = hermitian_eig(rho_in.matrix).eigenvalues;
  d.eigs_out = hermitian_eig(rho_out).eigenvalues;
  d.max_abs_mismatch = (d.eigs_in - d.eigs_out).cwiseAbs().maxCoeff();
  return d;
}

ExtractionReport extract_pseudo_pure(const ComplexMatrix& rho_out,
                                     const DeviationMatrix& rho_ref, EigSelector selector) {
  const EigenSystem ref = hermitian_eig(rho_ref.matrix);
  const EigenSystem out = hermitian_eig(rho_out);
  const Eigen::Index n = ref.eigenvalues.size();
  if (out.eigenvalues.size() != n) {
    throw std::invalid_argument("extract_pseudo_pure: dimension mismatch");
  }

  ExtractionReport report;
  report.input_eigenvalues = out.eigenvalues;
  report.reference_eigenvalues = ref.eigenvalues;
  report.max_mismatch = (ref.eigenvalues - out.eigenvalues).cwiseAbs().maxCoeff();

  Eigen::Index rank = 0;
  switch (selector) {
    case EigSelector::Largest:
      rank = 0;
      break;
    case EigSelector::Smallest:
      rank = n - 1;
      break;
    case EigSelector::MatchGroundRank: {
      // Rank of |0..0> in the reference: the eigenvector with the largest
      // overlap on the first basis state.
      double best = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = std::abs(ref.eigenvectors(0, i));
        if (w > best) {
          best = w;
          rank = i;
        }
      }
      break;
    }
  }

  // The tracked eigenvalue must be identifiable in the reference...
  auto gap_at = [&](const RealVector& eigs, Eigen::Index r) {
    double gap = std::numeric_limits<double>::infinity();
    if (r > 0) gap = std::min(gap, eigs(r - 1) - eigs(r));
    if (r + 1 < eigs.size()) gap = std::min(gap, eigs(r) - eigs(r + 1));
    return gap;
  };
  const double ref_gap = gap_at(ref.eigenvalues, rank);
  const double ref_scale = std::max(1.0, ref.eigenvalues.cwiseAbs().maxCoeff());
  if (ref_gap <= 1e-9 * ref_scale) {
    std::ostringstream msg;
    msg << "extract_pseudo_pure: designated reference eigenvalue "
        << ref.eigenvalues(rank) << " is degenerate (gap " << ref_gap << ")";
    throw std::runtime_error(msg.str());
  }
  // ...and in the output, where the guard scales with the observed mismatch.
  const double out_gap = gap_at(out.eigenvalues, rank);
  if (out_gap < 10.0 * report.max_mismatch) {
    std::ostringstream msg;
    msg << "extract_pseudo_pure: eigenvalue at rank " << rank
        << " cannot be tracked: gap " << out_gap << " < 10 * mismatch "
        << report.max_mismatch;
    throw std::runtime_error(msg.str());
  }

  report.selected_rank = static_cast<int>(rank);
  report.selected_eigenvalue = out.eigenvalues(rank);
  const ComplexVector v = out.eigenvectors.col(rank);
  report.extracted_state = v * v.adjoint();
  return report;
}

}  // namespace nmrqsim
