#pragma once

// Chart-wise Hermitian vector bundles: local connection one-forms, horizontal and
// total evolution along parameter curves, gauge and patch transformations, and the
// multi-patch Schrodinger/Heisenberg dynamics.
//
// Conventions. A chart stores the fiber metric eta(R) and connection components
// A_a(R) in its own fiber coordinates. A TransitionMap g carries components from
// `from` coordinates into `to` coordinates (v_to = g v_from). In terms of the map
// G = g^{-1} taking `to` components back to `from` components, the connections of the
// two charts are related by A_to = G^{-1} A_from G - i G^{-1} dG, equivalently
// A_to = g A_from g^{-1} + i (dg) g^{-1}.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoqm/evolution.hpp"
#include "geoqm/heisenberg.hpp"

namespace geoqm {

using Point = Eigen::VectorXd;
using MatrixField = std::function<Matrix(const Point&)>;
using GradientField = std::function<std::vector<Matrix>(const Point&)>;
using Domain = std::function<bool(const Point&)>;

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kTransitionTol = 1e-8;
inline constexpr double kGaugeConditionCap = 1e12;

/// Central differences of a matrix field along each coordinate; the step is relative
/// to max(1, |R^a|).
inline std::vector<Matrix> field_gradient(const MatrixField& f, const Point& r, double step) {
  std::vector<Matrix> out;
  out.reserve(static_cast<size_t>(r.size()));
  for (Eigen::Index a = 0; a < r.size(); ++a) {
    const double h = step * std::max(1.0, std::abs(r(a)));
    Point up = r;
    Point down = r;
    up(a) += h;
    down(a) -= h;
    out.push_back((f(up) - f(down)) / (up(a) - down(a)));
  }
  return out;
}

struct BundleChart {
  std::string id;
  int dim_base = 1;
  Eigen::Index fiber_dim = 1;
  MatrixField eta_field;
  std::vector<MatrixField> connection;
  std::optional<GradientField> eta_grad;
  Domain domain;
  double fd_step = kFiniteDifferenceStep;
  bool allow_finite_differences = true;

  bool contains(const Point& r) const { return !domain || domain(r); }

  MetricOperator metric(const Point& r) const { return MetricOperator(eta_field(r)); }

  std::vector<Matrix> connection_at(const Point& r) const {
    std::vector<Matrix> out;
    out.reserve(connection.size());
    for (const auto& a : connection) out.push_back(a(r));
    return out;
  }

  /// d_a eta: closed form when supplied, otherwise central differences.
  std::vector<Matrix> eta_gradient(const Point& r) const {
    if (eta_grad) return (*eta_grad)(r);
    if (!allow_finite_differences) throw Error(Errc::MissingGradient, "chart " + id + " has no eta gradient");
    return field_gradient(eta_field, r, fd_step);
  }

  /// d_a rho for rho = sqrt(eta), from rho X + X rho = d_a eta.
  std::vector<Matrix> rho_gradient(const Point& r) const {
    const Matrix eta = eta_field(r);
    auto grads = eta_gradient(r);
    for (auto& g : grads) g = sqrt_derivative(eta, g);
    return grads;
  }
};

/// Checks the metric on sampled points and the connection shapes.
inline void validate_chart(const BundleChart& chart, const std::vector<Point>& samples) {
  if (static_cast<int>(chart.connection.size()) != chart.dim_base) {
    throw Error(Errc::DimensionMismatch, "chart " + chart.id + ": need one connection component per base dimension");
  }
  for (const auto& r : samples) {
    if (r.size() != chart.dim_base) throw Error(Errc::DimensionMismatch, "chart point dimension");
    const MetricOperator m = chart.metric(r);
    if (m.dim() != chart.fiber_dim) throw Error(Errc::DimensionMismatch, "chart metric dimension");
    for (const auto& a : chart.connection_at(r)) {
      if (a.rows() != chart.fiber_dim || a.cols() != chart.fiber_dim) {
        throw Error(Errc::DimensionMismatch, "chart connection dimension");
      }
    }
  }
}

/// A_a = -i rho^{-1} d_a rho, the connection whose Hermitian part h_A vanishes.
inline std::vector<MatrixField> special_connection(const MatrixField& eta_field, int dim_base,
                                                   std::optional<GradientField> eta_grad = std::nullopt,
                                                   double fd_step = kFiniteDifferenceStep) {
  std::vector<MatrixField> out;
  for (int a = 0; a < dim_base; ++a) {
    out.push_back([eta_field, eta_grad, fd_step, a](const Point& r) -> Matrix {
      const Matrix eta = eta_field(r);
      const auto grads = eta_grad ? (*eta_grad)(r) : field_gradient(eta_field, r, fd_step);
      const Matrix rho = principal_sqrt(eta);
      const Matrix d_rho = sqrt_derivative(eta, grads[static_cast<size_t>(a)]);
      return Complex(0.0, -1.0) * left_divide(rho, d_rho);
    });
  }
  return out;
}

struct CurveSegment {
  std::string chart_id;
  double t_start = 0.0;
  double t_end = 1.0;
  std::function<Point(double)> point;
  std::function<Point(double)> velocity;
};

struct ParamCurve {
  std::vector<CurveSegment> segments;

  /// Segments must be contiguous in time and meet at common points.
  void validate(double tol = 1e-9) const {
    if (segments.empty()) throw Error(Errc::InvalidArgument, "curve has no segments");
    for (size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      if (!(s.t_end >= s.t_start) || !s.point || !s.velocity) {
        throw Error(Errc::InvalidArgument, "malformed curve segment " + std::to_string(i));
      }
      if (i == 0) continue;
      const auto& prev = segments[i - 1];
      if (std::abs(prev.t_end - s.t_start) > tol) throw Error(Errc::InvalidArgument, "curve segments not contiguous");
      if ((prev.point(prev.t_end) - s.point(s.t_start)).norm() > tol) {
        throw Error(Errc::InvalidArgument, "curve segments do not meet");
      }
    }
  }
};

struct FiberVector {
  std::string chart_id;
  Point r;
  Vector components;
};

/// Per-chart representatives O(R) of a u(E)-valued section, each pseudo-Hermitian with
/// respect to that chart's eta(R).
struct ObservableSection {
  std::map<std::string, MatrixField> charts;

  Matrix at(const std::string& chart_id, const Point& r) const {
    auto it = charts.find(chart_id);
    if (it == charts.end()) throw Error(Errc::InvalidArgument, "section has no data for chart " + chart_id);
    return it->second(r);
  }
};

struct TransitionMap {
  std::string from;
  std::string to;
  MatrixField g;
  std::optional<GradientField> g_grad;
  double fd_step = kFiniteDifferenceStep;
  bool allow_finite_differences = true;

  std::vector<Matrix> gradient(const Point& r) const {
    if (g_grad) return (*g_grad)(r);
    if (!allow_finite_differences) throw Error(Errc::MissingGradient, "transition " + from + "->" + to + " has no gradient");
    return field_gradient(g, r, fd_step);
  }
};

using ChartAtlas = std::map<std::string, BundleChart>;

// ---------------------------------------------------------------------------
// Single-chart dynamics

/// H_A = sum_a A_a(R) Rdot^a
inline Matrix connection_hamiltonian(const BundleChart& chart, const Point& r, const Point& r_dot) {
  if (r.size() != chart.dim_base || r_dot.size() != chart.dim_base) {
    throw Error(Errc::DimensionMismatch, "connection_hamiltonian: point dimension");
  }
  Matrix out = Matrix::Zero(chart.fiber_dim, chart.fiber_dim);
  for (int a = 0; a < chart.dim_base; ++a) {
    if (r_dot(a) != 0.0) out += chart.connection[static_cast<size_t>(a)](r) * r_dot(a);
  }
  return out;
}

/// H(t) = H_A(t) + H_E(t) along one segment; H_E is dropped when `energy` is null.
inline TimeDependentOperator segment_hamiltonian(const BundleChart& chart, const CurveSegment& seg,
                                                 const ObservableSection* energy, int steps) {
  if (seg.chart_id != chart.id) throw Error(Errc::InvalidArgument, "segment chart " + seg.chart_id + " vs " + chart.id);
  const TimeGrid grid(seg.t_start, seg.t_end, steps);
  std::optional<MatrixField> energy_field;
  if (energy) {
    auto it = energy->charts.find(chart.id);
    if (it == energy->charts.end()) throw Error(Errc::InvalidArgument, "section has no data for chart " + chart.id);
    energy_field = it->second;
  }
  return TimeDependentOperator(grid, [chart, seg, energy_field](double t) -> Matrix {
    const Point r = seg.point(t);
    Matrix h = connection_hamiltonian(chart, r, seg.velocity(t));
    if (energy_field) h += (*energy_field)(r);
    return h;
  });
}

/// Parallel transport of psi0 along the segment: the path-ordered exponential of -i A.
inline Vector horizontal_transport(const BundleChart& chart, const CurveSegment& seg, const Vector& psi0,
                                   int steps) {
  if (psi0.size() != chart.fiber_dim) throw Error(Errc::DimensionMismatch, "horizontal_transport: state size");
  const auto h = segment_hamiltonian(chart, seg, nullptr, steps);
  return propagate(h, seg.t_start, seg.t_end, steps) * psi0;
}

/// max_a |A_a^dagger eta - eta A_a - i d_a eta| at R; zero for a metric connection.
inline double metric_compatibility_residual(const BundleChart& chart, const Point& r) {
  const Matrix eta = chart.eta_field(r);
  const auto grads = chart.eta_gradient(r);
  const auto conn = chart.connection_at(r);
  double worst = 0.0;
  for (size_t a = 0; a < conn.size(); ++a) {
    worst = std::max(worst, max_abs(conn[a].adjoint() * eta - eta * conn[a] - kI * grads[a]));
  }
  return worst;
}

struct FiberTrajectory {
  std::vector<double> times;
  std::vector<FiberVector> states;
};

/// Solves i dPsi/dt = [H_A(t) + H_E(t)] Psi in one chart; H_E is the chart representative
/// of the energy section, required to be eta(R(t))-pseudo-Hermitian on every node.
inline FiberTrajectory total_evolve(const BundleChart& chart, const CurveSegment& seg,
                                    const ObservableSection& energy, const FiberVector& psi0, int steps,
                                    double tol = kStructureTol) {
  if (psi0.chart_id != chart.id) throw Error(Errc::InvalidArgument, "initial state lives in chart " + psi0.chart_id);
  if (psi0.components.size() != chart.fiber_dim) throw Error(Errc::DimensionMismatch, "total_evolve: state size");
  const auto h = segment_hamiltonian(chart, seg, &energy, steps);
  const TimeGrid& g = h.grid();
  for (int k = 0; k < g.size(); ++k) {
    const Point r = seg.point(g.time(k));
    const Matrix eta = chart.eta_field(r);
    const Matrix he = energy.at(chart.id, r);
    const double resid = max_abs(he.adjoint() * eta - eta * he);
    if (resid > tol * std::max(1.0, max_abs(eta) * max_abs(he))) {
      throw Error(Errc::SectionNotPseudoHermitian, "energy section residual " + std::to_string(resid));
    }
  }
  const auto psi = evolve_state(h, psi0.components);
  FiberTrajectory out;
  out.times = g.times();
  out.states.reserve(psi.size());
  for (int k = 0; k < g.size(); ++k) {
    out.states.push_back({chart.id, seg.point(g.time(k)), psi[static_cast<size_t>(k)]});
  }
  return out;
}

/// <Psi, Psi>_{eta(R)}
inline double fiber_norm2(const BundleChart& chart, const FiberVector& v) {
  return eta_inner(chart.metric(v.r), v.components, v.components).real();
}

/// <Psi, O Psi>_{eta(R)} / <Psi, Psi>_{eta(R)} for the chart representative of a section.
inline double fiber_expectation(const BundleChart& chart, const ObservableSection& obs, const FiberVector& v) {
  return eta_expectation(chart.metric(v.r), obs.at(chart.id, v.r), v.components).real();
}

struct HermitianSplit {
  Matrix h_connection;  // rho H_A rho^{-1} + i rho_dot rho^{-1}
  Matrix h_energy;      // rho H_E rho^{-1}
};

/// Euclidean-Hermitian decomposition h = h_A + h_E at time t on a segment.
inline HermitianSplit hermitian_decomposition(const BundleChart& chart, const CurveSegment& seg,
                                              const ObservableSection& energy, double t) {
  const Point r = seg.point(t);
  const Point r_dot = seg.velocity(t);
  const MetricOperator m = chart.metric(r);
  const auto d_rho = chart.rho_gradient(r);
  Matrix rho_dot = Matrix::Zero(chart.fiber_dim, chart.fiber_dim);
  for (int a = 0; a < chart.dim_base; ++a) rho_dot += d_rho[static_cast<size_t>(a)] * r_dot(a);
  const Matrix h_a = connection_hamiltonian(chart, r, r_dot);
  return {m.rho() * h_a * m.rho_inv() + kI * rho_dot * m.rho_inv(),
          m.rho() * energy.at(chart.id, r) * m.rho_inv()};
}

// ---------------------------------------------------------------------------
// Gauge and patch transformations

namespace detail {

inline Matrix checked_inverse(const Matrix& g) {
  const double cond = condition_number(g);
  if (!(cond <= kGaugeConditionCap)) throw Error(Errc::SingularGauge, "gauge matrix condition " + std::to_string(cond));
  return inverse(g);
}

}  // namespace detail

/// Chart expressed in new fiber coordinates Psi' = g(R) Psi:
/// A'_a = g A_a g^{-1} + i (d_a g) g^{-1},  eta' = (g^{-1})^dagger eta g^{-1}.
inline BundleChart gauge_transform(const BundleChart& chart, const MatrixField& g,
                                   std::optional<GradientField> g_grad = std::nullopt,
                                   std::string new_id = {}) {
  BundleChart out = chart;
  out.id = new_id.empty() ? chart.id : std::move(new_id);
  const double step = chart.fd_step;
  auto grad_of_g = [g, g_grad, step](const Point& r) {
    return g_grad ? (*g_grad)(r) : field_gradient(g, r, step);
  };
  const MatrixField old_eta = chart.eta_field;
  out.eta_field = [old_eta, g](const Point& r) -> Matrix {
    const Matrix g_inv = detail::checked_inverse(g(r));
    return g_inv.adjoint() * old_eta(r) * g_inv;
  };
  out.connection.clear();
  for (int a = 0; a < chart.dim_base; ++a) {
    const MatrixField old_a = chart.connection[static_cast<size_t>(a)];
    out.connection.push_back([old_a, g, grad_of_g, a](const Point& r) -> Matrix {
      const Matrix gr = g(r);
      const Matrix g_inv = detail::checked_inverse(gr);
      return gr * old_a(r) * g_inv + kI * grad_of_g(r)[static_cast<size_t>(a)] * g_inv;
    });
  }
  if (chart.eta_grad && g_grad) {
    const GradientField old_grad = *chart.eta_grad;
    const GradientField gg = *g_grad;
    out.eta_grad = [old_eta, old_grad, g, gg](const Point& r) {
      const Matrix g_inv = detail::checked_inverse(g(r));
      const Matrix eta = old_eta(r);
      const auto d_eta = old_grad(r);
      const auto d_g = gg(r);
      std::vector<Matrix> out_grad;
      for (size_t a = 0; a < d_eta.size(); ++a) {
        const Matrix d_ginv = -g_inv * d_g[a] * g_inv;
        out_grad.push_back(d_ginv.adjoint() * eta * g_inv + g_inv.adjoint() * d_eta[a] * g_inv +
                           g_inv.adjoint() * eta * d_ginv);
      }
      return out_grad;
    };
  } else {
    out.eta_grad.reset();
  }
  return out;
}

/// O' = g O g^{-1} for the section data of one chart, stored under `new_id`.
inline ObservableSection gauge_transform_section(const ObservableSection& section, const std::string& chart_id,
                                                 const MatrixField& g, const std::string& new_id) {
  ObservableSection out = section;
  const MatrixField old = section.charts.at(chart_id);
  out.charts[new_id] = [old, g](const Point& r) -> Matrix {
    const Matrix gr = g(r);
    return gr * old(r) * detail::checked_inverse(gr);
  };
  return out;
}

/// max |g^dagger eta_to g - eta_from|: the Hermitian-bundle condition at R.
inline double hermitian_bundle_residual(const TransitionMap& tm, const BundleChart& from, const BundleChart& to,
                                        const Point& r) {
  const Matrix g = tm.g(r);
  return max_abs(g.adjoint() * to.eta_field(r) * g - from.eta_field(r));
}

/// Throws NotUnitaryTransition unless the Hermitian-bundle condition holds at every point.
inline void validate_transition(const TransitionMap& tm, const BundleChart& from, const BundleChart& to,
                                const std::vector<Point>& overlap_points, double tol = kTransitionTol) {
  for (const auto& r : overlap_points) {
    if (!from.contains(r) || !to.contains(r)) throw Error(Errc::InvalidArgument, "point outside the chart overlap");
    const double resid = hermitian_bundle_residual(tm, from, to, r);
    if (resid > tol * std::max(1.0, max_abs(from.eta_field(r)))) {
      throw Error(Errc::NotUnitaryTransition, "transition " + tm.from + "->" + tm.to + " residual " + std::to_string(resid));
    }
  }
}

/// max_a |A_to,a - (g A_from,a g^{-1} + i (d_a g) g^{-1})| at an overlap point.
inline double patch_compatibility_residual(const TransitionMap& tm, const BundleChart& from, const BundleChart& to,
                                           const Point& r) {
  const Matrix g = tm.g(r);
  const Matrix g_inv = inverse(g);
  const auto d_g = tm.gradient(r);
  const auto a_from = from.connection_at(r);
  const auto a_to = to.connection_at(r);
  double worst = 0.0;
  for (size_t a = 0; a < a_from.size(); ++a) {
    worst = std::max(worst, max_abs(a_to[a] - (g * a_from[a] * g_inv + kI * d_g[a] * g_inv)));
  }
  return worst;
}

/// u(E) transition of a Euclidean-Hermitian operator: G o G^{-1}, G = rho_to g rho_from^{-1}.
inline Matrix observable_transition(const Matrix& g, const Matrix& rho_from, const Matrix& rho_to, const Matrix& o,
                                    double tol = kTransitionTol) {
  require_same_dim(g, o, "observable_transition");
  require_same_dim(rho_from, o, "observable_transition");
  require_same_dim(rho_to, o, "observable_transition");
  const Matrix big_g = right_divide(rho_to * g, rho_from);
  const double defect = unitarity_defect(big_g);
  if (defect > tol) throw Error(Errc::NotUnitaryTransition, "G defect " + std::to_string(defect));
  return right_divide(big_g * o, big_g);
}

inline Matrix observable_transition(const TransitionMap& tm, const BundleChart& from, const BundleChart& to,
                                    const Point& r, const Matrix& o, double tol = kTransitionTol) {
  return observable_transition(tm.g(r), from.metric(r).rho(), to.metric(r).rho(), o, tol);
}

// ---------------------------------------------------------------------------
// Multi-patch dynamics

namespace detail {

inline const TransitionMap& find_transition(const std::vector<TransitionMap>& transitions, const std::string& from,
                                            const std::string& to) {
  for (const auto& tm : transitions) {
    if (tm.from == from && tm.to == to) return tm;
  }
  throw Error(Errc::MissingTransition, "no transition " + from + " -> " + to);
}

inline const BundleChart& find_chart(const ChartAtlas& charts, const std::string& id) {
  auto it = charts.find(id);
  if (it == charts.end()) throw Error(Errc::InvalidArgument, "unknown chart " + id);
  return it->second;
}

}  // namespace detail

struct Junction {
  size_t left_index = 0;   // last node of the earlier segment
  size_t right_index = 0;  // first node of the later segment (same time)
};

struct MultiPatchTrajectory {
  std::vector<double> times;
  std::vector<FiberVector> states;
  std::vector<Junction> junctions;
};

/// Segment-wise total evolution; at each junction time the components are carried into
/// the next chart by the transition map evaluated at the junction point, and the next
/// segment's propagator restarts at the identity. Junction times appear twice.
inline MultiPatchTrajectory multi_patch_evolve(const ParamCurve& curve, const ChartAtlas& charts,
                                               const std::vector<TransitionMap>& transitions,
                                               const ObservableSection& energy, const FiberVector& psi0,
                                               int steps_per_segment, double tol = kStructureTol) {
  curve.validate();
  MultiPatchTrajectory out;
  FiberVector current = psi0;
  for (size_t s = 0; s < curve.segments.size(); ++s) {
    const auto& seg = curve.segments[s];
    const BundleChart& chart = detail::find_chart(charts, seg.chart_id);
    if (s > 0) {
      const Point r = seg.point(seg.t_start);
      const TransitionMap& tm = detail::find_transition(transitions, current.chart_id, seg.chart_id);
      validate_transition(tm, detail::find_chart(charts, tm.from), chart, {r});
      current = FiberVector{seg.chart_id, r, tm.g(r) * current.components};
    }
    auto piece = total_evolve(chart, seg, energy, current, steps_per_segment, tol);
    if (s > 0) out.junctions.push_back({out.states.size() - 1, out.states.size()});
    out.times.insert(out.times.end(), piece.times.begin(), piece.times.end());
    out.states.insert(out.states.end(), piece.states.begin(), piece.states.end());
    current = out.states.back();
  }
  return out;
}

struct JunctionMatch {
  double time = 0.0;
  Matrix left;   // U(t~,t0)^{-1} O(t~) U(t~,t0) from the earlier chart
  Matrix right;  // U(t~,t0)^{-1} g^{-1} O~(t~) g U(t~,t0) from the later chart
};

/// Heisenberg-picture operators acting in the fiber coordinates of R(t0), node by node
/// along the curve (junction times appear twice, as in multi_patch_evolve).
struct MultiPatchHeisenberg {
  std::vector<double> times;
  std::vector<Matrix> ops;
  std::vector<JunctionMatch> junctions;
  std::string initial_chart;
  MetricOperator initial_metric = MetricOperator::identity(1);
};

inline MultiPatchHeisenberg multi_patch_heisenberg(const ParamCurve& curve, const ChartAtlas& charts,
                                                   const std::vector<TransitionMap>& transitions,
                                                   const ObservableSection& observable,
                                                   const ObservableSection& energy, int steps_per_segment) {
  curve.validate();
  MultiPatchHeisenberg out;
  const auto& first = curve.segments.front();
  out.initial_chart = first.chart_id;
  out.initial_metric = detail::find_chart(charts, first.chart_id).metric(first.point(first.t_start));

  Matrix carried;      // maps initial-chart components at t0 to current-chart components
  Matrix carried_inv;  // its inverse
  for (size_t s = 0; s < curve.segments.size(); ++s) {
    const auto& seg = curve.segments[s];
    const BundleChart& chart = detail::find_chart(charts, seg.chart_id);
    Matrix entry = identity(chart.fiber_dim);
    Matrix entry_inv = identity(chart.fiber_dim);
    if (s > 0) {
      const Point r = seg.point(seg.t_start);
      const auto& prev_id = curve.segments[s - 1].chart_id;
      const TransitionMap& tm = detail::find_transition(transitions, prev_id, seg.chart_id);
      validate_transition(tm, detail::find_chart(charts, prev_id), chart, {r});
      const Matrix g = tm.g(r);
      entry = g * carried;
      entry_inv = carried_inv * inverse(g);
    }
    const auto h = segment_hamiltonian(chart, seg, &energy, steps_per_segment);
    const Propagation prop = propagate_series(h);
    const TimeGrid& grid = h.grid();
    for (int k = 0; k < grid.size(); ++k) {
      const auto i = static_cast<size_t>(k);
      const double t = grid.time(k);
      const Matrix w = prop.forward[i] * entry;
      const Matrix w_inv = entry_inv * prop.inverse[i];
      out.times.push_back(t);
      out.ops.push_back(w_inv * observable.at(chart.id, seg.point(t)) * w);
      if (k == 0 && s > 0) {
        out.junctions.push_back({t, out.ops[out.ops.size() - 2], out.ops.back()});
      }
      if (k == grid.steps) {
        carried = w;
        carried_inv = w_inv;
      }
    }
  }
  return out;
}

}  // namespace geoqm
