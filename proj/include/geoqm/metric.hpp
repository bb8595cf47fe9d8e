#pragma once

// Metric operators, eta-inner products, pseudo-adjoints and the similarity map
// onto a Euclidean-Hermitian representative.

#include <optional>
#include <string>

#include "geoqm/linalg.hpp"

namespace geoqm {

/// Hermitian positive-definite automorphism eta with cached rho = sqrt(eta), rho^{-1}
/// and eta^{-1}. Construction validates; the stored eta is the Hermitian part of the
/// input.
class MetricOperator {
 public:
  explicit MetricOperator(const Matrix& eta, double tol = kStructureTol) {
    require_square(eta, "MetricOperator");
    if (!all_finite(eta)) throw Error(Errc::NotPositiveDefinite, "metric has non-finite entries");
    const double scale = std::max(1.0, max_abs(eta));
    if (hermiticity_residual(eta) > tol * scale) {
      throw Error(Errc::NotPositiveDefinite, "metric is not Hermitian");
    }
    eta_ = 0.5 * (eta + eta.adjoint());
    rho_ = principal_sqrt(eta_, tol);
    rho_inv_ = inverse(rho_);
    eta_inv_ = rho_inv_ * rho_inv_;
  }

  static MetricOperator identity(Eigen::Index n) { return MetricOperator(geoqm::identity(n)); }

  const Matrix& eta() const { return eta_; }
  const Matrix& rho() const { return rho_; }
  const Matrix& rho_inv() const { return rho_inv_; }
  const Matrix& eta_inv() const { return eta_inv_; }
  Eigen::Index dim() const { return eta_.rows(); }

 private:
  Matrix eta_;
  Matrix rho_;
  Matrix rho_inv_;
  Matrix eta_inv_;
};

/// <zeta, xi>_eta = <zeta | eta xi>
inline Complex eta_inner(const MetricOperator& eta, const Vector& zeta, const Vector& xi) {
  if (zeta.size() != eta.dim() || xi.size() != eta.dim()) {
    throw Error(Errc::DimensionMismatch, "eta_inner: vector size");
  }
  return zeta.dot(eta.eta() * xi);
}

/// <psi, O psi>_eta / <psi, psi>_eta
inline Complex eta_expectation(const MetricOperator& eta, const Matrix& o, const Vector& psi) {
  const Complex norm = eta_inner(eta, psi, psi);
  if (std::abs(norm) == 0.0) throw Error(Errc::ZeroState, "eta_expectation of the zero vector");
  return eta_inner(eta, psi, o * psi) / norm;
}

/// H# = eta^{-1} H^dagger eta, the adjoint with respect to <.,.>_eta.
inline Matrix pseudo_adjoint(const Matrix& h, const MetricOperator& eta) {
  require_square(h, "pseudo_adjoint");
  if (h.rows() != eta.dim()) throw Error(Errc::DimensionMismatch, "pseudo_adjoint: dimension");
  return eta.eta_inv() * h.adjoint() * eta.eta();
}

struct ResidualCheck {
  bool ok = false;
  double residual = 0.0;
};

/// Tests H^dagger = eta H eta^{-1}; the residual is the max-entry norm of the difference.
inline ResidualCheck is_pseudo_hermitian(const Matrix& h, const MetricOperator& eta,
                                         double tol = kStructureTol) {
  require_square(h, "is_pseudo_hermitian");
  if (h.rows() != eta.dim()) throw Error(Errc::DimensionMismatch, "is_pseudo_hermitian: dimension");
  const double r = max_abs(h.adjoint() - eta.eta() * h * eta.eta_inv());
  return {r < tol, r};
}

/// eta = sum_n w_n |phi_n><phi_n| over the adjoint-problem eigenvectors. Unit weights
/// by default; any positive weights give a valid metric.
inline MetricOperator spectral_metric(const EigenSystem& es,
                                      const std::optional<Eigen::VectorXd>& weights = std::nullopt,
                                      double tol = kStructureTol) {
  const Eigen::Index n = es.values.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex lambda = es.values(j);
    if (std::abs(lambda.imag()) > tol * std::max(1.0, std::abs(lambda))) {
      throw Error(Errc::ComplexSpectrum, "spectral_metric: eigenvalue with imaginary part " +
                                             std::to_string(lambda.imag()));
    }
  }
  Eigen::VectorXd w = weights.value_or(Eigen::VectorXd::Ones(n));
  if (w.size() != n) throw Error(Errc::DimensionMismatch, "spectral_metric: weight count");
  if ((w.array() <= 0.0).any()) throw Error(Errc::NotPositiveDefinite, "spectral_metric: weights must be > 0");
  const Matrix eta = es.left * w.cast<Complex>().asDiagonal() * es.left.adjoint();
  return MetricOperator(eta, tol);
}

/// h = rho H rho^{-1}: Hermitian in the Euclidean space when H is eta-pseudo-Hermitian.
inline Matrix to_hermitian_rep(const Matrix& h, const MetricOperator& eta, double tol = kStructureTol) {
  const auto check = is_pseudo_hermitian(h, eta, tol * std::max(1.0, max_abs(h)));
  if (!check.ok) {
    throw Error(Errc::NotPseudoHermitian,
                "to_hermitian_rep: residual " + std::to_string(check.residual));
  }
  return eta.rho() * h * eta.rho_inv();
}

}  // namespace geoqm
