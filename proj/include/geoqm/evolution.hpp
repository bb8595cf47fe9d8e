#pragma once

// Dynamical metrics that make a given evolution unitary, the unitarity residual,
// Hermitian representatives, the modified Schrodinger equation and time-dependent
// canonical transformations.

#include <vector>

#include "geoqm/linalg.hpp"
#include "geoqm/metric.hpp"

namespace geoqm {

/// d/dt of node samples: central differences inside, second-order one-sided at the ends.
inline std::vector<Matrix> central_derivative(const std::vector<Matrix>& samples, double dt) {
  const size_t n = samples.size();
  if (n < 2) throw Error(Errc::GridMismatch, "central_derivative needs two samples");
  std::vector<Matrix> out(n);
  if (n == 2) {
    out[0] = out[1] = (samples[1] - samples[0]) / dt;
    return out;
  }
  out[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * dt);
  out[n - 1] = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * dt);
  for (size_t k = 1; k + 1 < n; ++k) out[k] = (samples[k + 1] - samples[k - 1]) / (2.0 * dt);
  return out;
}

/// eta(t) = (U^dagger)^{-1} eta0 U^{-1}, built with linear solves and re-symmetrized
/// before validation.
inline MetricOperator metric_from_propagator(const Matrix& u, const MetricOperator& eta0) {
  require_same_dim(u, eta0.eta(), "metric_from_propagator");
  auto lu = u.adjoint().partialPivLu();
  const Matrix y = lu.solve(eta0.eta());        // U^{-dagger} eta0
  const Matrix eta = lu.solve(y.adjoint()).adjoint();  // (U^{-dagger} (U^{-dagger} eta0)^dagger)^dagger
  return MetricOperator(0.5 * (eta + eta.adjoint()));
}

/// The metric at time t that makes U(t, t0) unitary from H_{eta0} onto H_{eta(t)}.
inline MetricOperator dynamical_metric(const TimeDependentOperator& h, const MetricOperator& eta0,
                                       double t, int steps) {
  const Matrix u = propagate(h, h.grid().t0, t, steps);
  if (t == h.grid().t0) return eta0;
  try {
    return metric_from_propagator(u, eta0);
  } catch (const Error& e) {
    throw Error(Errc::NotPositiveDefinite, std::string("dynamical_metric drifted (grid too coarse?): ") + e.what());
  }
}

/// Dynamical metric on every node of H's grid.
inline std::vector<MetricOperator> dynamical_metric_series(const Propagation& prop,
                                                           const MetricOperator& eta0) {
  std::vector<MetricOperator> out;
  out.reserve(prop.forward.size());
  out.push_back(eta0);
  for (size_t k = 1; k < prop.forward.size(); ++k) out.push_back(metric_from_propagator(prop.forward[k], eta0));
  return out;
}

inline std::vector<MetricOperator> dynamical_metric_series(const TimeDependentOperator& h,
                                                           const MetricOperator& eta0) {
  return dynamical_metric_series(propagate_series(h), eta0);
}

inline std::vector<Matrix> metric_matrices(const std::vector<MetricOperator>& metrics) {
  std::vector<Matrix> out;
  out.reserve(metrics.size());
  for (const auto& m : metrics) out.push_back(m.eta());
  return out;
}

inline std::vector<Matrix> rho_matrices(const std::vector<MetricOperator>& metrics) {
  std::vector<Matrix> out;
  out.reserve(metrics.size());
  for (const auto& m : metrics) out.push_back(m.rho());
  return out;
}

/// max |H# - H - i eta^{-1} eta_dot|; zero iff the evolution is eta-unitary at this instant.
inline double unitarity_residual(const Matrix& h, const MetricOperator& eta, const Matrix& eta_dot) {
  require_same_dim(h, eta.eta(), "unitarity_residual");
  require_same_dim(eta_dot, eta.eta(), "unitarity_residual");
  return max_abs(pseudo_adjoint(h, eta) - h - kI * eta.eta_inv() * eta_dot);
}

/// Residual at every node, with eta_dot from central differences of the metric samples.
inline std::vector<double> unitarity_residual_series(const TimeDependentOperator& h,
                                                     const std::vector<MetricOperator>& metrics) {
  const TimeGrid& g = h.grid();
  if (static_cast<int>(metrics.size()) != g.size()) throw Error(Errc::GridMismatch, "metric count");
  const auto eta_dot = central_derivative(metric_matrices(metrics), g.dt());
  std::vector<double> out(metrics.size());
  for (int k = 0; k < g.size(); ++k) {
    out[static_cast<size_t>(k)] = unitarity_residual(h.node(k), metrics[static_cast<size_t>(k)], eta_dot[static_cast<size_t>(k)]);
  }
  return out;
}

/// h(t) = rho H rho^{-1} + i rho_dot rho^{-1} sampled on H's grid.
inline TimeDependentOperator hermitian_rep(const TimeDependentOperator& h,
                                           const std::vector<MetricOperator>& metrics,
                                           double tol = kPropagationTol) {
  const TimeGrid& g = h.grid();
  if (static_cast<int>(metrics.size()) != g.size()) throw Error(Errc::GridMismatch, "metric count");
  const auto rho_dot = central_derivative(rho_matrices(metrics), g.dt());
  std::vector<Matrix> out;
  out.reserve(metrics.size());
  for (int k = 0; k < g.size(); ++k) {
    const auto& m = metrics[static_cast<size_t>(k)];
    Matrix hk = m.rho() * h.node(k) * m.rho_inv() + kI * rho_dot[static_cast<size_t>(k)] * m.rho_inv();
    const double r = hermiticity_residual(hk);
    if (r > tol * std::max(1.0, max_abs(hk))) {
      throw Error(Errc::NotHermitianOutput,
                  "hermitian_rep: residual " + std::to_string(r) + " at t=" + std::to_string(g.time(k)));
    }
    out.push_back(std::move(hk));
  }
  return TimeDependentOperator(g, std::move(out));
}

/// H_E = rho^{-1} h rho
inline Matrix energy_operator(const Matrix& h, const Matrix& rho) {
  require_same_dim(h, rho, "energy_operator");
  return left_divide(rho, h * rho);
}

/// Solves i (d/dt + rho^{-1} rho_dot) psi = H_E psi on H_E's grid. rho_dot comes from
/// central differences of the rho samples.
inline std::vector<Vector> solve_modified_schrodinger(const TimeDependentOperator& energy,
                                                      const std::vector<Matrix>& rho,
                                                      const Vector& psi0) {
  const TimeGrid& g = energy.grid();
  if (static_cast<int>(rho.size()) != g.size()) throw Error(Errc::GridMismatch, "rho count");
  const auto rho_dot = central_derivative(rho, g.dt());
  std::vector<Matrix> generator;
  generator.reserve(rho.size());
  for (int k = 0; k < g.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    generator.push_back(energy.node(k) - kI * left_divide(rho[i], rho_dot[i]));
  }
  return evolve_state(TimeDependentOperator(g, std::move(generator)), psi0);
}

struct CanonicalImage {
  Vector state;
  Matrix observable;
  Matrix hamiltonian;
};

/// Psi -> U Psi, o -> U o U^{-1}, h -> U h U^{-1} + i U_dot U^{-1}.
inline CanonicalImage canonical_transform(const Vector& state, const Matrix& obs, const Matrix& ham,
                                          const Matrix& u, const Matrix& u_dot,
                                          double tol = kStructureTol) {
  require_square(u, "canonical_transform");
  require_same_dim(obs, u, "canonical_transform");
  require_same_dim(ham, u, "canonical_transform");
  require_same_dim(u_dot, u, "canonical_transform");
  if (state.size() != u.rows()) throw Error(Errc::DimensionMismatch, "canonical_transform: state size");
  const double defect = unitarity_defect(u);
  if (defect > tol) throw Error(Errc::NotUnitary, "canonical_transform: defect " + std::to_string(defect));
  const Matrix u_inv = u.adjoint();
  return {u * state, u * obs * u_inv, u * ham * u_inv + kI * u_dot * u_inv};
}

/// Both representations of one system: (H_{eta(t)}, H(t)) and (H, h(t)).
struct RepresentationPair {
  TimeDependentOperator hamiltonian;
  std::vector<MetricOperator> metrics;
  TimeDependentOperator hermitian;
  Propagation propagation;
};

inline RepresentationPair make_representation_pair(const TimeDependentOperator& h,
                                                   const MetricOperator& eta0,
                                                   double tol = kPropagationTol) {
  Propagation prop = propagate_series(h);
  auto metrics = dynamical_metric_series(prop, eta0);
  auto herm = hermitian_rep(h, metrics, tol);
  return {h, std::move(metrics), std::move(herm), std::move(prop)};
}

}  // namespace geoqm
