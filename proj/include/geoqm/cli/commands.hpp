#pragma once

// run / check / spectrum on a validated RunConfig.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoqm/bundle.hpp"
#include "geoqm/cli/config.hpp"
#include "geoqm/evolution.hpp"
#include "geoqm/heisenberg.hpp"
#include "geoqm/systems.hpp"

namespace geoqm::cli {

using MatrixOfTime = std::function<Matrix(double)>;

/// A configured system: Hamiltonian on the run grid, initial data and named observables
/// (eta representation). Bundle runs carry the fixture instead of a Hamiltonian.
struct Scenario {
  std::string system;
  Eigen::Index dim = 0;
  std::optional<TimeDependentOperator> hamiltonian;
  MetricOperator eta0 = MetricOperator::identity(1);
  Vector psi0;
  std::map<std::string, MatrixOfTime> observables;
  std::optional<IntroSystem> intro;
  std::optional<OscillatorParitySystem> oscillator;
  std::optional<TwoChartFixture> bundle;
};

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SpectrumEntry {
  Complex value;
  std::string label;  // real | conjugate-pair | unpaired-complex
};

struct SpectrumReport {
  double time = 0.0;
  std::vector<SpectrumEntry> entries;
  std::string classification;
};

// ---------------------------------------------------------------------------
// Scenario construction

namespace detail {

inline double param(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) throw ConfigError(std::string("param '") + key + "' must be a number");
  return p.at(key).get<double>();
}

inline Modulation modulation_from_json(const json& j) {
  const std::string kind = j.value("kind", "constant");
  try {
    if (kind == "constant") return Modulation::constant(complex_from_json(j.at("amplitude")));
    if (kind == "exponential") {
      return Modulation::exponential(complex_from_json(j.at("amplitude")), j.value("frequency", 0.0));
    }
    if (kind == "piecewise") {
      std::vector<Complex> levels;
      for (const auto& z : j.at("levels")) levels.push_back(complex_from_json(z));
      return Modulation::piecewise(j.at("breakpoints").get<std::vector<double>>(), std::move(levels));
    }
    if (kind == "tabulated") {
      std::vector<Complex> values;
      for (const auto& z : j.at("values")) values.push_back(complex_from_json(z));
      return Modulation::tabulated(j.at("times").get<std::vector<double>>(), std::move(values));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("modulation: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("modulation: ") + e.what());
  }
  throw ConfigError("unknown modulation kind '" + kind + "'");
}

inline Vector basis_vector(Eigen::Index n, Eigen::Index k) {
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return v;
}

// "e<k>" names a basis vector.
inline std::optional<Vector> parse_basis_name(const std::string& name, Eigen::Index n) {
  if (name.size() < 2 || name[0] != 'e') return std::nullopt;
  try {
    size_t used = 0;
    const long k = std::stol(name.substr(1), &used);
    if (used + 1 != name.size() || k < 0 || k >= n) return std::nullopt;
    return basis_vector(n, k);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline Vector initial_state(const RunConfig& c, Eigen::Index n, const std::map<std::string, Vector>& named) {
  if (!c.initial_state.empty()) {
    auto it = named.find(c.initial_state);
    if (it != named.end()) return it->second;
    if (auto v = parse_basis_name(c.initial_state, n)) return *v;
    throw ConfigError("unknown initial state '" + c.initial_state + "'");
  }
  if (static_cast<Eigen::Index>(c.state.size()) != n) {
    throw ConfigError("initial state has " + std::to_string(c.state.size()) + " components, system needs " +
                      std::to_string(n));
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = c.state[static_cast<size_t>(i)];
  if (v.squaredNorm() == 0.0) throw ConfigError("initial state is zero");
  return v;
}

inline MetricOperator initial_metric(const RunConfig& c, Eigen::Index n) {
  if (!c.eta0) return MetricOperator::identity(n);
  const Matrix eta = matrix_from_rows(*c.eta0);
  if (eta.rows() != n || eta.cols() != n) throw ConfigError("eta0 dimension does not match the system");
  try {
    return MetricOperator(eta);
  } catch (const Error& e) {
    throw ConfigError(std::string("eta0: ") + e.what());
  }
}

}  // namespace detail

inline Scenario build_scenario(const RunConfig& c) {
  validate_config(c);
  Scenario s;
  s.system = c.system;
  const TimeGrid grid(c.grid.t0, c.grid.t1, c.grid.steps);
  const json& p = c.params;

  if (c.system == "intro") {
    IntroSystem sys(detail::param(p, "epsilon", 1.0));
    s.intro = sys;
    s.dim = 2;
    const Matrix h = sys.hamiltonian();
    s.hamiltonian = TimeDependentOperator(grid, [h](double) { return h; });
    s.observables["H"] = [h](double) { return h; };
    s.observables["sigma_x"] = [](double) { return geoqm::detail::pauli_x(); };
    s.observables["sigma_y"] = [](double) { return geoqm::detail::pauli_y(); };
    s.observables["sigma_z"] = [](double) { return geoqm::detail::pauli_z(); };
    s.psi0 = detail::initial_state(c, 2, {{"chi", IntroSystem::chi()}});
  } else if (c.system == "oscillator_parity") {
    OscillatorParitySystem sys;
    sys.levels = static_cast<int>(detail::param(p, "levels", sys.levels));
    sys.omega = detail::param(p, "omega", sys.omega);
    sys.mass = detail::param(p, "mass", sys.mass);
    if (p.contains("modulation")) sys.f = detail::modulation_from_json(p.at("modulation"));
    sys.grid = grid;
    try {
      sys.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    s.oscillator = sys;
    s.dim = sys.levels;
    s.hamiltonian = sys.hamiltonian_operator();
    s.observables["H"] = [sys](double t) { return sys.hamiltonian(t); };
    s.observables["H0"] = [sys](double) { return sys.h0(); };
    s.observables["parity"] = [sys](double) { return sys.parity(); };
    s.observables["x"] = [sys](double t) { return osc_position_momentum(sys, t).first; };
    s.observables["p"] = [sys](double t) { return osc_position_momentum(sys, t).second; };
    std::map<std::string, Vector> named{{"ground", detail::basis_vector(s.dim, 0)}};
    if (s.dim >= 2) {
      named["superposition"] = (detail::basis_vector(s.dim, 0) + detail::basis_vector(s.dim, 1)) / std::sqrt(2.0);
    }
    s.psi0 = detail::initial_state(c, s.dim, named);
  } else if (c.system == "inline") {
    if (!p.contains("hamiltonian")) throw ConfigError("inline system needs params.hamiltonian");
    const Matrix h = matrix_from_json(p.at("hamiltonian"));
    if (h.rows() != h.cols()) throw ConfigError("inline hamiltonian must be square");
    s.dim = h.rows();
    if (p.contains("drive")) {
      const auto& d = p.at("drive");
      const Matrix m = matrix_from_json(d.at("matrix"));
      if (m.rows() != s.dim || m.cols() != s.dim) throw ConfigError("drive matrix dimension");
      const Modulation f = detail::modulation_from_json(d.at("modulation"));
      s.hamiltonian = TimeDependentOperator(grid, [h, m, f](double t) -> Matrix { return h + f.value(t) * m; });
    } else {
      s.hamiltonian = TimeDependentOperator(grid, [h](double) { return h; });
    }
    const TimeDependentOperator ham = *s.hamiltonian;
    s.observables["H"] = [ham](double t) { return ham.at(t); };
    if (p.contains("observables")) {
      for (const auto& [name, value] : p.at("observables").items()) {
        const Matrix o = matrix_from_json(value);
        if (o.rows() != s.dim || o.cols() != s.dim) throw ConfigError("observable " + name + " dimension");
        s.observables[name] = [o](double) { return o; };
      }
    }
    s.psi0 = detail::initial_state(c, s.dim, {});
  } else {
    TwoChartParams tp;
    tp.kappa = detail::param(p, "kappa", tp.kappa);
    tp.lambda = detail::param(p, "lambda", tp.lambda);
    tp.omega = detail::param(p, "omega", tp.omega);
    tp.beta = detail::param(p, "beta", tp.beta);
    tp.r0 = detail::param(p, "r0", tp.r0);
    tp.speed = detail::param(p, "speed", tp.speed);
    tp.t_junction = detail::param(p, "t_junction", tp.t_junction);
    tp.t0 = c.grid.t0;
    tp.t1 = c.grid.t1;
    if (!(tp.t_junction > tp.t0 && tp.t_junction < tp.t1)) throw ConfigError("t_junction must lie inside the grid");
    auto fx = two_chart_fixture(tp);
    for (const auto& seg : fx.curve.segments) {
      const auto& chart = fx.charts.at(seg.chart_id);
      if (!chart.contains(seg.point(seg.t_start)) || !chart.contains(seg.point(seg.t_end))) {
        throw ConfigError("curve leaves chart " + seg.chart_id + "; adjust r0, speed or t_junction");
      }
    }
    s.dim = 2;
    s.psi0 = detail::initial_state(c, 2, {{"default", fx.psi0.components}});
    fx.psi0.components = s.psi0;
    s.bundle = std::move(fx);
  }

  s.eta0 = detail::initial_metric(c, s.dim);
  for (const auto& name : c.observables) {
    if (s.system == "geqm_two_chart") {
      if (name != "energy" && name != "observable") throw ConfigError("unknown observable '" + name + "'");
    } else if (!s.observables.count(name)) {
      throw ConfigError("unknown observable '" + name + "' for system " + s.system);
    }
  }
  if (c.representation == "hermitian_rep" && c.metric != "dynamical") {
    throw ConfigError("hermitian_rep needs the dynamical metric");
  }
  return s;
}

// ---------------------------------------------------------------------------
// run

namespace detail {

inline void push_complex(std::vector<double>& row, Complex z) {
  row.push_back(z.real());
  row.push_back(z.imag());
}

inline std::vector<std::string> state_columns(Eigen::Index n) {
  std::vector<std::string> cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    cols.push_back("psi" + std::to_string(i) + "_re");
    cols.push_back("psi" + std::to_string(i) + "_im");
  }
  return cols;
}

inline std::vector<MetricOperator> run_metrics(const Scenario& s, const RunConfig& c, const Propagation& prop) {
  if (c.metric == "dynamical") return dynamical_metric_series(prop, s.eta0);
  return std::vector<MetricOperator>(prop.forward.size(), s.eta0);
}

// dEta/dt along the curve from the chart gradient.
inline Matrix bundle_eta_dot(const BundleChart& chart, const CurveSegment& seg, double t) {
  const auto grads = chart.eta_gradient(seg.point(t));
  const Point v = seg.velocity(t);
  Matrix out = Matrix::Zero(chart.fiber_dim, chart.fiber_dim);
  for (size_t a = 0; a < grads.size(); ++a) out += grads[a] * v(static_cast<Eigen::Index>(a));
  return out;
}

inline Series run_bundle(const Scenario& s, const RunConfig& c) {
  const auto& fx = *s.bundle;
  const auto traj = multi_patch_evolve(fx.curve, fx.charts, fx.transitions, fx.energy, fx.psi0, c.grid.steps);
  Series out;
  out.columns = {"t", "segment"};
  for (auto& col : state_columns(s.dim)) out.columns.push_back(col);
  out.columns.insert(out.columns.end(), {"norm2_euclid", "norm2_eta"});
  for (const auto& name : c.observables) {
    out.columns.push_back("exp_" + name + "_re");
    out.columns.push_back("exp_" + name + "_im");
  }
  out.columns.push_back("unitarity_residual");

  size_t segment = 0;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    if (segment < traj.junctions.size() && k == traj.junctions[segment].right_index) ++segment;
    const auto& seg = fx.curve.segments[segment];
    const auto& v = traj.states[k];
    const auto& chart = fx.charts.at(v.chart_id);
    const MetricOperator m = chart.metric(v.r);
    std::vector<double> row{traj.times[k], static_cast<double>(segment)};
    for (Eigen::Index i = 0; i < s.dim; ++i) push_complex(row, v.components(i));
    row.push_back(v.components.squaredNorm());
    row.push_back(eta_inner(m, v.components, v.components).real());
    for (const auto& name : c.observables) {
      const auto& section = name == "energy" ? fx.energy : fx.observable;
      push_complex(row, eta_expectation(m, section.at(chart.id, v.r), v.components));
    }
    const Matrix h = connection_hamiltonian(chart, v.r, seg.velocity(traj.times[k])) + fx.energy.at(chart.id, v.r);
    row.push_back(unitarity_residual(h, m, bundle_eta_dot(chart, seg, traj.times[k])));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

inline Series cmd_run(const Scenario& s, const RunConfig& c) {
  if (s.bundle) return detail::run_bundle(s, c);
  const TimeDependentOperator& h = *s.hamiltonian;
  const TimeGrid& grid = h.grid();
  const Propagation prop = propagate_series(h);
  const auto metrics = detail::run_metrics(s, c, prop);
  const bool herm = c.representation == "hermitian_rep";

  Series out;
  out.columns = {"t"};
  for (auto& col : detail::state_columns(s.dim)) out.columns.push_back(col);
  out.columns.insert(out.columns.end(), {"norm2_euclid", "norm2_eta"});
  for (const auto& name : c.observables) {
    out.columns.push_back("exp_" + name + "_re");
    out.columns.push_back("exp_" + name + "_im");
  }
  out.columns.push_back("unitarity_residual");

  std::vector<Vector> states;
  std::vector<double> residuals;
  if (herm) {
    const auto h_rep = hermitian_rep(h, metrics, c.tolerance("propagation", kPropagationTol));
    states = evolve_state(h_rep, s.eta0.rho() * s.psi0);
    for (int k = 0; k < grid.size(); ++k) residuals.push_back(hermiticity_residual(h_rep.node(k)));
  } else {
    states = evolve_state(h, s.psi0);
    residuals = unitarity_residual_series(h, metrics);
  }

  for (int k = 0; k < grid.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    const double t = grid.time(k);
    const Vector& psi = states[i];
    const auto& m = metrics[i];
    std::vector<double> row{t};
    for (Eigen::Index j = 0; j < s.dim; ++j) detail::push_complex(row, psi(j));
    row.push_back(psi.squaredNorm());
    row.push_back(herm ? psi.squaredNorm() : eta_inner(m, psi, psi).real());
    for (const auto& name : c.observables) {
      const Matrix o = s.observables.at(name)(t);
      if (herm) {
        const Matrix o_rep = m.rho() * o * m.rho_inv();
        detail::push_complex(row, psi.dot(o_rep * psi) / psi.squaredNorm());
      } else {
        detail::push_complex(row, eta_expectation(m, o, psi));
      }
    }
    row.push_back(residuals[i]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// check

namespace detail {

inline CheckResult make_check(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, residual <= tol};
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

inline void claim_checks(const Scenario& s, const RunConfig& c, std::vector<CheckResult>& out) {
  const double tol = c.tolerance("structure", kStructureTol);
  for (const auto& claim : c.claims) {
    if (s.bundle) throw ConfigError("claims are not supported for the bundle fixture");
    const Matrix h0 = s.hamiltonian->node(0);
    if (claim == "pseudo-hermitian") {
      out.push_back(make_check("claim:pseudo-hermitian", is_pseudo_hermitian(h0, s.eta0).residual, tol));
    } else if (claim == "hermitian") {
      out.push_back(make_check("claim:hermitian", hermiticity_residual(h0), tol));
    } else if (claim == "unitary") {
      const auto prop = propagate_series(*s.hamiltonian);
      const auto metrics = run_metrics(s, c, prop);
      out.push_back(make_check("claim:unitary", max_of(unitarity_residual_series(*s.hamiltonian, metrics)),
                               c.tolerance("unitarity", 1e-5)));
    } else {
      throw ConfigError("unknown claim '" + claim + "'");
    }
  }
}

inline std::vector<CheckResult> intro_checks(const Scenario& s, const RunConfig& c) {
  std::vector<CheckResult> out;
  const IntroSystem& sys = *s.intro;
  const double eps = sys.epsilon;
  const double exact = c.tolerance("exact", 1e-12) * std::max(1.0, eps);
  const EigenSystem es = eigen(sys.hamiltonian());
  out.push_back(make_check("eigenvalues_plus_minus_2eps",
                           std::max(std::abs(es.values(0) + 2.0 * eps), std::abs(es.values(1) - 2.0 * eps)), exact));
  const Matrix eta = spectral_metric(es).eta();
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  expected(1, 1) = 0.25;
  out.push_back(make_check("spectral_metric_proportional_diag_1_quarter", max_abs(eta / eta(0, 0) - expected),
                           c.tolerance("exact", 1e-12)));
  out.push_back(make_check("euclidean_expectation_at_chi",
                           std::abs(intro_expectation(sys, IntroSystem::chi()) - Complex(0.0, 1.5 * eps)), exact));
  out.push_back(make_check("pseudo_hermitian_wrt_diag_1_quarter",
                           is_pseudo_hermitian(sys.hamiltonian(), IntroSystem::metric()).residual,
                           c.tolerance("structure", kStructureTol)));
  return out;
}

inline std::vector<CheckResult> oscillator_checks(const Scenario& s, const RunConfig& c) {
  std::vector<CheckResult> out;
  const OscillatorParitySystem& sys = *s.oscillator;
  const TimeDependentOperator& h = *s.hamiltonian;
  const TimeGrid& grid = h.grid();
  const double tol = c.tolerance("propagation", kPropagationTol);
  const double tol_inner = c.tolerance("inner_product", 1e-7);
  const auto pair = make_representation_pair(h, s.eta0, tol);
  const bool identity_start = max_abs(s.eta0.eta() - identity(s.dim)) == 0.0;

  double du = 0.0, deta = 0.0, dh = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    const auto cf = osc_closed_forms(sys, grid.t0, grid.time(k));
    du = std::max(du, max_abs(pair.propagation.forward[i] - cf.u));
    if (identity_start) {
      deta = std::max(deta, max_abs(pair.metrics[i].eta() - cf.eta));
      dh = std::max(dh, max_abs(pair.hermitian.node(k) - cf.h));
    }
  }
  out.push_back(make_check("propagator_vs_closed_form", du, tol));
  if (identity_start) {
    out.push_back(make_check("dynamical_metric_vs_closed_form", deta, tol));
    out.push_back(make_check("hermitian_rep_vs_closed_form", dh, tol));
  }

  Vector other = detail::basis_vector(s.dim, s.dim > 1 ? 1 : 0);
  if (s.dim > 2) other = (other + Complex(0.0, 1.0) * detail::basis_vector(s.dim, 2)) / std::sqrt(2.0);
  double drift = 0.0;
  const Complex start = eta_inner(s.eta0, s.psi0, other);
  for (size_t k = 0; k < pair.propagation.forward.size(); ++k) {
    const auto& u = pair.propagation.forward[k];
    drift = std::max(drift, std::abs(eta_inner(pair.metrics[k], u * s.psi0, u * other) - start));
  }
  out.push_back(make_check("eta_inner_product_conserved", drift, tol_inner));
  out.push_back(make_check("unitarity_residual_dynamical_metric",
                           max_of(unitarity_residual_series(h, pair.metrics)), c.tolerance("unitarity", 1e-5)));

  if (identity_start) {
    std::vector<Matrix> xs;
    for (int k = 0; k < grid.size(); ++k) xs.push_back(osc_position_momentum(sys, grid.time(k)).first);
    const TimeDependentOperator x_op(grid, std::move(xs));
    const auto traj = heisenberg_op(x_op, pair.propagation, Representation::eta);
    const auto psi = evolve_state(h, s.psi0);
    double worst = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
      worst = std::max(worst, expectation_equivalence(x_op, psi, pair.metrics, traj, k).difference());
    }
    out.push_back(make_check("heisenberg_expectation_equivalence_x", worst, tol_inner));
  }
  return out;
}

inline std::vector<CheckResult> inline_checks(const Scenario& s, const RunConfig& c) {
  std::vector<CheckResult> out;
  const auto prop = propagate_series(*s.hamiltonian);
  const auto metrics = dynamical_metric_series(prop, s.eta0);
  out.push_back(make_check("unitarity_residual_dynamical_metric",
                           max_of(unitarity_residual_series(*s.hamiltonian, metrics)), c.tolerance("unitarity", 1e-5)));
  const auto rep = make_representation_pair(*s.hamiltonian, s.eta0, 1e300);
  double herm = 0.0;
  for (int k = 0; k < rep.hermitian.grid().size(); ++k) {
    herm = std::max(herm, hermiticity_residual(rep.hermitian.node(k)) / std::max(1.0, max_abs(rep.hermitian.node(k))));
  }
  out.push_back(make_check("hermitian_rep_is_hermitian", herm, c.tolerance("propagation", kPropagationTol)));
  return out;
}

inline std::vector<CheckResult> bundle_checks(const Scenario& s, const RunConfig& c) {
  std::vector<CheckResult> out;
  const auto& fx = *s.bundle;
  const int steps = c.grid.steps;
  const double tol_junction = c.tolerance("junction", 1e-8);
  const double tol_structure = c.tolerance("connection", 1e-8);

  const auto traj = multi_patch_evolve(fx.curve, fx.charts, fx.transitions, fx.energy, fx.psi0, steps);
  double d_norm = 0.0, d_energy = 0.0;
  for (const auto& j : traj.junctions) {
    const auto& left = traj.states[j.left_index];
    const auto& right = traj.states[j.right_index];
    const auto& cl = fx.charts.at(left.chart_id);
    const auto& cr = fx.charts.at(right.chart_id);
    d_norm = std::max(d_norm, std::abs(fiber_norm2(cl, left) - fiber_norm2(cr, right)));
    d_energy = std::max(d_energy, std::abs(fiber_expectation(cl, fx.energy, left) - fiber_expectation(cr, fx.energy, right)));
  }
  out.push_back(make_check("junction_eta_norm_continuity", d_norm, tol_junction));
  out.push_back(make_check("junction_energy_continuity", d_energy, tol_junction));

  // h_A vanishes only where the connection is the special one (chart "a" of the fixture).
  double compat = 0.0, h_a = 0.0;
  for (const auto& seg : fx.curve.segments) {
    const auto& chart = fx.charts.at(seg.chart_id);
    const TimeGrid g(seg.t_start, seg.t_end, steps);
    for (int k = 0; k < g.size(); ++k) {
      compat = std::max(compat, metric_compatibility_residual(chart, seg.point(g.time(k))));
      if (chart.id == "a") {
        h_a = std::max(h_a, max_abs(hermitian_decomposition(chart, seg, fx.energy, g.time(k)).h_connection));
      }
    }
  }
  out.push_back(make_check("metric_compatibility", compat, tol_structure));
  out.push_back(make_check("special_connection_h_A_vanishes", h_a, tol_structure));

  double patch = 0.0, bundle_cond = 0.0;
  for (size_t i = 1; i < fx.curve.segments.size(); ++i) {
    const auto& seg = fx.curve.segments[i];
    const auto& from = fx.curve.segments[i - 1].chart_id;
    const Point r = seg.point(seg.t_start);
    const auto& tm = geoqm::detail::find_transition(fx.transitions, from, seg.chart_id);
    patch = std::max(patch, patch_compatibility_residual(tm, fx.charts.at(from), fx.charts.at(seg.chart_id), r));
    bundle_cond = std::max(bundle_cond, hermitian_bundle_residual(tm, fx.charts.at(from), fx.charts.at(seg.chart_id), r));
  }
  out.push_back(make_check("patch_compatibility_at_junction", patch, c.tolerance("patch", 1e-6)));
  out.push_back(make_check("hermitian_bundle_condition", bundle_cond, tol_junction));

  const auto heis = multi_patch_heisenberg(fx.curve, fx.charts, fx.transitions, fx.observable, fx.energy, steps);
  double chain = 0.0;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const auto& v = traj.states[k];
    const auto& chart = fx.charts.at(v.chart_id);
    const double schr = fiber_expectation(chart, fx.observable, v);
    const double heis_val = eta_expectation(heis.initial_metric, heis.ops[k], fx.psi0.components).real();
    chain = std::max(chain, std::abs(schr - heis_val));
  }
  out.push_back(make_check("heisenberg_expectation_chain", chain, c.tolerance("inner_product", 1e-7)));
  return out;
}

}  // namespace detail

inline std::vector<CheckResult> cmd_check(const Scenario& s, const RunConfig& c) {
  std::vector<CheckResult> out;
  if (s.intro) out = detail::intro_checks(s, c);
  if (s.oscillator) out = detail::oscillator_checks(s, c);
  if (s.system == "inline") out = detail::inline_checks(s, c);
  if (s.bundle) out = detail::bundle_checks(s, c);
  detail::claim_checks(s, c, out);
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.passed; });
}

// ---------------------------------------------------------------------------
// spectrum

/// Labels each eigenvalue real, conjugate-pair (its conjugate is also present) or
/// unpaired-complex. The overall label is the worst one present.
inline SpectrumReport classify_spectrum(const Vector& values, double tol = 1e-9) {
  SpectrumReport rep;
  const Eigen::Index n = values.size();
  std::vector<bool> used(static_cast<size_t>(n), false);
  rep.entries.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex z = values(i);
    const double scale = std::max(1.0, std::abs(z));
    auto& e = rep.entries[static_cast<size_t>(i)];
    e.value = z;
    if (std::abs(z.imag()) <= tol * scale) {
      e.label = "real";
      continue;
    }
    e.label = "unpaired-complex";
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (std::abs(values(j) - std::conj(z)) <= tol * scale) {
        e.label = "conjugate-pair";
        break;
      }
    }
  }
  rep.classification = "real";
  for (const auto& e : rep.entries) {
    if (e.label == "unpaired-complex") rep.classification = "unpaired-complex";
    if (e.label == "conjugate-pair" && rep.classification == "real") rep.classification = "conjugate-pair";
  }
  return rep;
}

/// Spectrum of the Schrodinger generator at time t (for the bundle fixture, H_A + H_E in
/// the chart covering R(t)).
inline SpectrumReport cmd_spectrum(const Scenario& s, const RunConfig& c, double t) {
  if (t < c.grid.t0 || t > c.grid.t1) throw ConfigError("spectrum time outside the grid");
  Matrix h;
  if (s.bundle) {
    const auto& fx = *s.bundle;
    const auto& segs = fx.curve.segments;
    const CurveSegment* seg = &segs.back();
    for (const auto& sg : segs) {
      if (t <= sg.t_end) {
        seg = &sg;
        break;
      }
    }
    const auto& chart = fx.charts.at(seg->chart_id);
    const Point r = seg->point(t);
    h = connection_hamiltonian(chart, r, seg->velocity(t)) + fx.energy.at(chart.id, r);
  } else {
    h = s.hamiltonian->at(t);
  }
  auto rep = classify_spectrum(eigen(h).values, c.tolerance("spectrum", 1e-9));
  rep.time = t;
  return rep;
}

}  // namespace geoqm::cli
