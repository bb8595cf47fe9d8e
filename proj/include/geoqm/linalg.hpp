#pragma once

// Dense complex kernel: adjoints, biorthonormal eigensystems, principal square
// roots, exponentials and time-ordered propagation (hbar = 1).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "geoqm/errors.hpp"
#include "geoqm/time_operator.hpp"

namespace geoqm {

/// Relative tolerance for Hermiticity / positivity gates.
inline constexpr double kStructureTol = 1e-9;
/// Acceptance tolerance for propagated quantities.
inline constexpr double kPropagationTol = 1e-6;
/// Cap on the condition number of the right-eigenvector matrix.
inline constexpr double kConditionCap = 1e12;

// ---------------------------------------------------------------------------
// Small helpers

/// Max-entry norm of any dense expression; 0 for empty input.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(Errc::DimensionMismatch, std::string(who) + ": matrix must be square and non-empty");
  }
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::DimensionMismatch, std::string(who) + ": dimensions differ");
  }
}

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

/// Conjugate transpose with respect to the Euclidean inner product.
inline Matrix adjoint(const Matrix& m) { return m.adjoint(); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// max |m - m^dagger|
inline double hermiticity_residual(const Matrix& m) { return max_abs(m - m.adjoint()); }

/// max |U^dagger U - I|
inline double unitarity_defect(const Matrix& u) {
  return max_abs(u.adjoint() * u - identity(u.rows()));
}

/// a * b^{-1} without forming the inverse.
inline Matrix right_divide(const Matrix& a, const Matrix& b) {
  return b.transpose().partialPivLu().solve(a.transpose()).transpose();
}

/// a^{-1} * b without forming the inverse.
inline Matrix left_divide(const Matrix& a, const Matrix& b) { return a.partialPivLu().solve(b); }

inline Matrix inverse(const Matrix& m) { return m.partialPivLu().inverse(); }

/// Ratio of extreme singular values; +inf for singular input.
inline double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// ---------------------------------------------------------------------------
// Eigensystems

/// Eigenvalues with right eigenvectors (columns of `right`) and the adjoint-problem
/// vectors (columns of `left`) scaled so that left^dagger * right = I.
struct EigenSystem {
  Vector values;
  Matrix right;
  Matrix left;
};

inline EigenSystem eigen(const Matrix& m, double condition_cap = kConditionCap) {
  require_square(m, "eigen");
  Eigen::ComplexEigenSolver<Matrix> solver(m, true);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::NonDiagonalizable, "eigen solver did not converge");
  }
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Vector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (raw(a).real() != raw(b).real()) return raw(a).real() < raw(b).real();
    return raw(a).imag() < raw(b).imag();
  });

  EigenSystem es;
  es.values.resize(n);
  es.right.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<size_t>(j)];
    es.values(j) = raw(src);
    es.right.col(j) = solver.eigenvectors().col(src).normalized();
  }
  const double cond = condition_number(es.right);
  if (!(cond <= condition_cap)) {
    throw Error(Errc::NonDiagonalizable,
                "eigenvector matrix condition number " + std::to_string(cond) + " exceeds cap");
  }
  es.left = es.right.adjoint().partialPivLu().solve(identity(n));
  return es;
}

/// max |L^dagger R - I|
inline double biorthonormality_residual(const EigenSystem& es) {
  return max_abs(es.left.adjoint() * es.right - identity(es.right.cols()));
}

// ---------------------------------------------------------------------------
// Square roots and exponentials

/// Positive square root of a Hermitian positive-definite matrix.
inline Matrix principal_sqrt(const Matrix& m, double tol = kStructureTol) {
  require_square(m, "principal_sqrt");
  const double scale = std::max(1.0, max_abs(m));
  if (hermiticity_residual(m) > tol * scale) {
    throw Error(Errc::NotPositiveDefinite, "principal_sqrt: input is not Hermitian");
  }
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const double top = std::max(std::abs(lambda(0)), std::abs(lambda(lambda.size() - 1)));
  if (!(lambda(0) > tol * std::max(1e-300, top))) {
    throw Error(Errc::NotPositiveDefinite,
                "principal_sqrt: smallest eigenvalue " + std::to_string(lambda(0)));
  }
  const Matrix& v = solver.eigenvectors();
  return v * lambda.cwiseSqrt().cast<Complex>().asDiagonal() * v.adjoint();
}

/// Derivative of the principal square root: solves rho*X + X*rho = d_eta for X,
/// given eta (Hermitian PD) and its derivative d_eta (Hermitian).
inline Matrix sqrt_derivative(const Matrix& eta, const Matrix& d_eta) {
  require_same_dim(eta, d_eta, "sqrt_derivative");
  const Matrix herm = 0.5 * (eta + eta.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = solver.eigenvectors();
  Matrix x = v.adjoint() * d_eta * v;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) /= (root(i) + root(j));
  }
  return v * x * v.adjoint();
}

/// exp(m) by Pade scaling-and-squaring.
inline Matrix matrix_exp(const Matrix& m) {
  require_square(m, "matrix_exp");
  return m.exp();
}

// ---------------------------------------------------------------------------
// Time-ordered propagation: U <- exp(-i dt H(t + dt/2)) U

inline Matrix midpoint_step(const Matrix& h_mid, double dt) { return matrix_exp(Complex(0.0, -dt) * h_mid); }

namespace detail {

// Maps [t0, t1] onto H's node range (sampled) or checks it lies inside H's grid.
inline TimeGrid propagation_grid(const TimeDependentOperator& h, double t0, double t1, int steps,
                                 int& first_node) {
  const TimeGrid& g = h.grid();
  if (!(t1 >= t0)) throw Error(Errc::InvalidArgument, "propagate needs t1 >= t0");
  if (steps < 1) throw Error(Errc::InvalidArgument, "propagate needs steps >= 1");
  const double slack = 1e-12 * std::max(1.0, std::abs(g.t1 - g.t0));
  if (t0 < g.t0 - slack || t1 > g.t1 + slack) {
    throw Error(Errc::GridMismatch, "propagation interval leaves the operator's grid");
  }
  first_node = 0;
  if (!h.has_generator()) {
    first_node = g.node_index(t0);
    const int last = g.node_index(t1);
    if (last - first_node != steps) {
      throw Error(Errc::GridMismatch, "steps must match the sampled grid between t0 and t1");
    }
  }
  return TimeGrid(t0, t1, steps);
}

inline Matrix midpoint_value(const TimeDependentOperator& h, const TimeGrid& sub, int first_node, int k) {
  if (h.has_generator()) return h.at(sub.midpoint(k));
  return h.midpoint(first_node + k);
}

}  // namespace detail

/// U(t1, t0) for i dU/dt = H(t) U. Returns the identity exactly when t1 == t0.
inline Matrix propagate(const TimeDependentOperator& h, double t0, double t1, int steps) {
  const Eigen::Index n = h.dim();
  if (t1 == t0) return identity(n);
  int first = 0;
  const TimeGrid sub = detail::propagation_grid(h, t0, t1, steps, first);
  Matrix u = identity(n);
  const double dt = sub.dt();
  for (int k = 0; k < sub.steps; ++k) {
    u = midpoint_step(detail::midpoint_value(h, sub, first, k), dt) * u;
  }
  return u;
}

/// Propagators U(t_k, t0) on every node of H's grid together with their inverses
/// U(t0, t_k), the latter accumulated by stepping backward.
struct Propagation {
  TimeGrid grid;
  std::vector<Matrix> forward;
  std::vector<Matrix> inverse;
};

inline Propagation propagate_series(const TimeDependentOperator& h) {
  const TimeGrid& g = h.grid();
  const Eigen::Index n = h.dim();
  Propagation p{g, {}, {}};
  p.forward.reserve(static_cast<size_t>(g.size()));
  p.inverse.reserve(static_cast<size_t>(g.size()));
  p.forward.push_back(identity(n));
  p.inverse.push_back(identity(n));
  const double dt = g.dt();
  for (int k = 0; k < g.steps; ++k) {
    const Matrix hm = h.midpoint(k);
    p.forward.push_back(midpoint_step(hm, dt) * p.forward.back());
    p.inverse.push_back(p.inverse.back() * midpoint_step(hm, -dt));
  }
  return p;
}

/// State trajectory psi(t_k) on H's grid, stepped vector-wise.
inline std::vector<Vector> evolve_state(const TimeDependentOperator& h, const Vector& psi0) {
  if (psi0.size() != h.dim()) throw Error(Errc::DimensionMismatch, "evolve_state: state size");
  const TimeGrid& g = h.grid();
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(g.size()));
  out.push_back(psi0);
  const double dt = g.dt();
  for (int k = 0; k < g.steps; ++k) out.push_back(midpoint_step(h.midpoint(k), dt) * out.back());
  return out;
}

}  // namespace geoqm
