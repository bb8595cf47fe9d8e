#pragma once

// Heisenberg-picture operators O^(H)(t) = U^{-1} O(t) U in either representation,
// the residual of their equation of motion, and the expectation-value bridge
// between pictures.

#include <vector>

#include "geoqm/evolution.hpp"

namespace geoqm {

enum class Representation { hermitian, eta };

struct HeisenbergTrajectory {
  TimeGrid grid;
  std::vector<Matrix> ops;
  Representation rep = Representation::hermitian;
};

/// O^(H)(t_k) = U(t_k,t0)^{-1} O(t_k) U(t_k,t0) with the inverse taken from the
/// backward-stepped propagator.
inline HeisenbergTrajectory heisenberg_op(const TimeDependentOperator& o, const Propagation& prop,
                                          Representation rep) {
  const TimeGrid& g = prop.grid;
  if (!(o.grid() == g)) throw Error(Errc::GridMismatch, "heisenberg_op: grids differ");
  if (o.dim() != prop.forward.front().rows()) throw Error(Errc::DimensionMismatch, "heisenberg_op");
  if (max_abs(prop.forward.front() - identity(o.dim())) > 0.0) {
    throw Error(Errc::InvalidArgument, "heisenberg_op: U(t0,t0) must be the identity");
  }
  HeisenbergTrajectory traj{g, {}, rep};
  traj.ops.reserve(prop.forward.size());
  for (int k = 0; k < g.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    traj.ops.push_back(prop.inverse[i] * o.node(k) * prop.forward[i]);
  }
  return traj;
}

/// max over interior nodes of |i dO^(H)/dt - [O^(H), H^(H)] - i U^{-1} O_dot U|, the
/// time derivative taken by central differences.
inline double heisenberg_residual(const HeisenbergTrajectory& traj, const TimeDependentOperator& h,
                                  const Propagation& prop, const std::vector<Matrix>& o_dot) {
  const TimeGrid& g = traj.grid;
  if (!(h.grid() == g) || !(prop.grid == g) || static_cast<int>(o_dot.size()) != g.size()) {
    throw Error(Errc::GridMismatch, "heisenberg_residual: grids differ");
  }
  double worst = 0.0;
  const double dt = g.dt();
  for (int k = 1; k < g.steps; ++k) {
    const auto i = static_cast<size_t>(k);
    const Matrix d_ops = (traj.ops[i + 1] - traj.ops[i - 1]) / (2.0 * dt);
    const Matrix h_heis = prop.inverse[i] * h.node(k) * prop.forward[i];
    const Matrix explicit_term = prop.inverse[i] * o_dot[i] * prop.forward[i];
    const Matrix r = kI * d_ops - commutator(traj.ops[i], h_heis) - kI * explicit_term;
    worst = std::max(worst, max_abs(r));
  }
  return worst;
}

struct ExpectationPair {
  double schrodinger = 0.0;
  double heisenberg = 0.0;
  double difference() const { return std::abs(schrodinger - heisenberg); }
};

/// Schrodinger-picture <psi(t), O(t) psi(t)>_{eta(t)} against Heisenberg-picture
/// <psi(t0), O^(H)(t) psi(t0)>_{eta(t0)}, both normalized, at node k. Real parts.
inline ExpectationPair expectation_equivalence(const TimeDependentOperator& o,
                                               const std::vector<Vector>& psi,
                                               const std::vector<MetricOperator>& metrics,
                                               const HeisenbergTrajectory& traj, int k) {
  const auto i = static_cast<size_t>(k);
  if (i >= psi.size() || i >= metrics.size() || i >= traj.ops.size()) {
    throw Error(Errc::GridMismatch, "expectation_equivalence: node out of range");
  }
  ExpectationPair out;
  out.schrodinger = eta_expectation(metrics[i], o.node(k), psi[i]).real();
  out.heisenberg = eta_expectation(metrics.front(), traj.ops[i], psi.front()).real();
  return out;
}

/// O^(H) = rho(t0)^{-1} o^(H) rho(t0): carries a Hermitian-representation trajectory into
/// the eta representation.
inline HeisenbergTrajectory to_eta_rep(const HeisenbergTrajectory& herm, const MetricOperator& eta0) {
  HeisenbergTrajectory out{herm.grid, {}, Representation::eta};
  out.ops.reserve(herm.ops.size());
  for (const auto& op : herm.ops) out.ops.push_back(eta0.rho_inv() * op * eta0.rho());
  return out;
}

/// max_k |U(t_k) - rho(t_k)^{-1} u(t_k) rho(t0)|
inline double factorization_residual(const Propagation& eta_side, const Propagation& herm_side,
                                     const std::vector<MetricOperator>& metrics) {
  double worst = 0.0;
  for (size_t k = 0; k < eta_side.forward.size(); ++k) {
    const Matrix rhs = metrics[k].rho_inv() * herm_side.forward[k] * metrics.front().rho();
    worst = std::max(worst, max_abs(eta_side.forward[k] - rhs));
  }
  return worst;
}

/// max_k |(O^(H))# - O^(H)| with the adjoint taken in H_{eta(t0)}.
inline double eta_hermiticity_residual(const HeisenbergTrajectory& traj, const MetricOperator& eta0) {
  double worst = 0.0;
  for (const auto& op : traj.ops) worst = std::max(worst, max_abs(pseudo_adjoint(op, eta0) - op));
  return worst;
}

}  // namespace geoqm
