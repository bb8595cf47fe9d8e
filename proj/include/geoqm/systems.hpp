#pragma once

// Fixture systems with closed-form answers: the 2x2 intro Hamiltonian, the truncated
// oscillator with a parity drive, and a two-chart bundle over a circle of parameters.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "geoqm/bundle.hpp"
#include "geoqm/evolution.hpp"
#include "geoqm/metric.hpp"

namespace geoqm {

// ---------------------------------------------------------------------------
// Intro 2x2 system

struct IntroSystem {
  double epsilon = 1.0;

  explicit IntroSystem(double eps = 1.0) : epsilon(eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::InvalidArgument, "epsilon must be positive");
  }

  Matrix hamiltonian() const {
    Matrix h(2, 2);
    h << 0.0, epsilon, 4.0 * epsilon, 0.0;
    return h;
  }

  /// (1, -i)/sqrt(2)
  static Vector chi() {
    Vector v(2);
    v << 1.0, Complex(0.0, -1.0);
    return v / std::sqrt(2.0);
  }

  /// diag(1, 1/4)
  static MetricOperator metric() {
    Matrix eta = Matrix::Zero(2, 2);
    eta(0, 0) = 1.0;
    eta(1, 1) = 0.25;
    return MetricOperator(eta);
  }
};

inline Complex intro_expectation(const IntroSystem& sys, const Vector& state,
                                 const std::optional<MetricOperator>& metric = std::nullopt) {
  if (state.size() != 2) throw Error(Errc::DimensionMismatch, "intro_expectation: state size");
  if (state.squaredNorm() == 0.0) throw Error(Errc::ZeroState, "intro_expectation of the zero vector");
  const Matrix h = sys.hamiltonian();
  if (metric) return eta_expectation(*metric, h, state);
  return state.dot(h * state) / state.squaredNorm();
}

// ---------------------------------------------------------------------------
// Time-dependent drive f(t) and its antiderivative F(t) = int_{t0}^t f

struct Modulation {
  enum class Kind { constant, exponential, piecewise, tabulated };

  Kind kind = Kind::constant;
  Complex amplitude{0.0, 0.0};
  double frequency = 0.0;
  std::vector<double> breakpoints;  // piecewise: level j holds on [b_{j-1}, b_j)
  std::vector<Complex> levels;      // piecewise: breakpoints.size() + 1 values
  std::vector<double> sample_times;  // tabulated: increasing, linear interpolation,
  std::vector<Complex> samples;      // held constant outside the table

  static Modulation constant(Complex a) { return {Kind::constant, a, 0.0, {}, {}, {}, {}}; }
  static Modulation exponential(Complex a, double nu) { return {Kind::exponential, a, nu, {}, {}, {}, {}}; }
  static Modulation piecewise(std::vector<double> breaks, std::vector<Complex> values) {
    Modulation m{Kind::piecewise, {}, 0.0, std::move(breaks), std::move(values), {}, {}};
    m.validate();
    return m;
  }
  static Modulation tabulated(std::vector<double> times, std::vector<Complex> values) {
    Modulation m{Kind::tabulated, {}, 0.0, {}, {}, std::move(times), std::move(values)};
    m.validate();
    return m;
  }

  void validate() const {
    if (kind == Kind::piecewise) {
      if (levels.size() != breakpoints.size() + 1) throw Error(Errc::InvalidArgument, "piecewise: need one more level than breakpoints");
      if (!std::is_sorted(breakpoints.begin(), breakpoints.end())) throw Error(Errc::InvalidArgument, "piecewise: unsorted breakpoints");
    }
    if (kind == Kind::tabulated) {
      if (sample_times.size() != samples.size() || samples.empty()) throw Error(Errc::InvalidArgument, "tabulated: size mismatch");
      for (size_t i = 1; i < sample_times.size(); ++i) {
        if (!(sample_times[i] > sample_times[i - 1])) throw Error(Errc::InvalidArgument, "tabulated: times must increase");
      }
    }
  }

  Complex value(double t) const {
    switch (kind) {
      case Kind::constant: return amplitude;
      case Kind::exponential: return amplitude * std::exp(Complex(0.0, frequency * t));
      case Kind::piecewise: {
        const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
        return levels[static_cast<size_t>(it - breakpoints.begin())];
      }
      case Kind::tabulated: {
        if (t <= sample_times.front()) return samples.front();
        if (t >= sample_times.back()) return samples.back();
        const auto it = std::upper_bound(sample_times.begin(), sample_times.end(), t);
        const auto j = static_cast<size_t>(it - sample_times.begin());
        const double w = (t - sample_times[j - 1]) / (sample_times[j] - sample_times[j - 1]);
        return (1.0 - w) * samples[j - 1] + w * samples[j];
      }
    }
    return {};
  }

  /// Exact integral of f over [t0, t] (t >= t0); for tabulated drives this is the
  /// integral of the linear interpolant.
  Complex integral(double t0, double t) const {
    switch (kind) {
      case Kind::constant: return amplitude * (t - t0);
      case Kind::exponential:
        if (frequency == 0.0) return amplitude * (t - t0);
        return amplitude * (std::exp(Complex(0.0, frequency * t)) - std::exp(Complex(0.0, frequency * t0))) /
               Complex(0.0, frequency);
      case Kind::piecewise:
      case Kind::tabulated: {
        std::vector<double> cuts{t0};
        const auto& knots = kind == Kind::piecewise ? breakpoints : sample_times;
        for (double b : knots) {
          if (b > t0 && b < t) cuts.push_back(b);
        }
        cuts.push_back(t);
        Complex sum{0.0, 0.0};
        for (size_t i = 1; i < cuts.size(); ++i) {
          const double a = cuts[i - 1];
          const double b = cuts[i];
          if (kind == Kind::piecewise) {
            sum += value(0.5 * (a + b)) * (b - a);
          } else {
            sum += 0.5 * (value(a) + value(b)) * (b - a);
          }
        }
        return sum;
      }
    }
    return {};
  }
};

// ---------------------------------------------------------------------------
// Truncated oscillator H(t) = H0 + f(t) P in the number basis

struct OscillatorParitySystem {
  int levels = 16;
  double omega = 1.0;
  double mass = 1.0;
  Modulation f = Modulation::exponential(std::polar(0.5, std::numbers::pi / 4.0), 1.0);
  TimeGrid grid{0.0, 1.0, 1000};

  void validate() const {
    if (levels < 1) throw Error(Errc::InvalidArgument, "oscillator: levels must be >= 1");
    if (!(omega > 0.0) || !(mass > 0.0)) throw Error(Errc::InvalidArgument, "oscillator: omega and mass must be > 0");
    f.validate();
  }

  /// F(t) = int_{t0}^t f with t0 the grid start.
  Complex big_f(double t) const { return f.integral(grid.t0, t); }

  Eigen::VectorXd h0_diagonal() const {
    Eigen::VectorXd d(levels);
    for (int n = 0; n < levels; ++n) d(n) = omega * (n + 0.5);
    return d;
  }

  Eigen::VectorXd parity_diagonal() const {
    Eigen::VectorXd d(levels);
    for (int n = 0; n < levels; ++n) d(n) = (n % 2 == 0) ? 1.0 : -1.0;
    return d;
  }

  Matrix h0() const { return h0_diagonal().cast<Complex>().asDiagonal(); }
  Matrix parity() const { return parity_diagonal().cast<Complex>().asDiagonal(); }

  Matrix hamiltonian(double t) const { return h0() + f.value(t) * parity(); }

  TimeDependentOperator hamiltonian_operator() const {
    validate();
    const OscillatorParitySystem self = *this;
    return TimeDependentOperator(grid, [self](double t) { return self.hamiltonian(t); });
  }

  /// Annihilation operator a|n> = sqrt(n)|n-1>.
  Matrix lowering() const {
    Matrix a = Matrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
  }

  Matrix position() const {
    const Matrix a = lowering();
    return std::sqrt(1.0 / (2.0 * mass * omega)) * (a + a.adjoint());
  }

  Matrix momentum() const {
    const Matrix a = lowering();
    return Complex(0.0, std::sqrt(mass * omega / 2.0)) * (a.adjoint() - a);
  }
};

struct OscillatorClosedForms {
  Matrix u;
  Matrix eta;
  Matrix rho;
  Matrix h;
};

/// U = exp(-i(t-t0)H0) exp(-i F P), eta = exp(-2 Im F P), rho = exp(-Im F P),
/// h = H0 + Re f(t) P, all entrywise on the diagonal. F is taken from t0.
inline OscillatorClosedForms osc_closed_forms(const OscillatorParitySystem& sys, double t0, double t) {
  sys.validate();
  if (!(t >= t0)) throw Error(Errc::InvalidArgument, "osc_closed_forms needs t >= t0");
  const Complex big_f = sys.f.integral(t0, t);
  const auto e = sys.h0_diagonal();
  const auto p = sys.parity_diagonal();
  Vector u(sys.levels), eta(sys.levels), rho(sys.levels), h(sys.levels);
  for (int n = 0; n < sys.levels; ++n) {
    u(n) = std::exp(Complex(0.0, -(t - t0) * e(n))) * std::exp(Complex(0.0, -1.0) * big_f * p(n));
    eta(n) = std::exp(-2.0 * big_f.imag() * p(n));
    rho(n) = std::exp(-big_f.imag() * p(n));
    h(n) = e(n) + sys.f.value(t).real() * p(n);
  }
  return {u.asDiagonal(), eta.asDiagonal(), rho.asDiagonal(), h.asDiagonal()};
}

/// Closed-form eta-representation position and momentum exp(2 Im F P) X, exp(2 Im F P) P_mom.
inline std::pair<Matrix, Matrix> osc_position_momentum(const OscillatorParitySystem& sys, double t) {
  sys.validate();
  const double im_f = sys.big_f(t).imag();
  Vector scale(sys.levels);
  const auto p = sys.parity_diagonal();
  for (int n = 0; n < sys.levels; ++n) scale(n) = std::exp(2.0 * im_f * p(n));
  return {scale.asDiagonal() * sys.position(), scale.asDiagonal() * sys.momentum()};
}

// ---------------------------------------------------------------------------
// Two-chart bundle over a one-dimensional parameter R with fiber C^2.
//
// Chart "a": eta = exp(-2 s(R) sigma_z), s = kappa sin R, and the connection
// A = i kappa cos R sigma_z (= -i rho^{-1} d rho). Chart "b" is the gauge image under
// g = exp(i lambda R sigma_x). The curve R = r0 + speed t is split at t_junction.

struct TwoChartParams {
  double kappa = 0.3;
  double lambda = 0.5;
  double omega = 1.0;
  double beta = 0.4;
  double r0 = 0.5;
  double speed = 4.0;
  double t0 = 0.0;
  double t1 = 1.0;
  double t_junction = 0.75;
};

struct TwoChartFixture {
  TwoChartParams params;
  ChartAtlas charts;
  std::vector<TransitionMap> transitions;
  ParamCurve curve;
  ObservableSection energy;
  ObservableSection observable;
  FiberVector psi0;
};

namespace detail {

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline Matrix exp_pauli_z(Complex c) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(c);
  m(1, 1) = std::exp(-c);
  return m;
}

// exp(i theta sigma_x)
inline Matrix rotation_x(double theta) {
  return std::cos(theta) * identity(2) + Complex(0.0, std::sin(theta)) * pauli_x();
}

}  // namespace detail

inline TwoChartFixture two_chart_fixture(const TwoChartParams& p = {}) {
  using detail::exp_pauli_z;
  using detail::pauli_x;
  using detail::pauli_y;
  using detail::pauli_z;
  using detail::rotation_x;

  TwoChartFixture fx;
  fx.params = p;
  const double kappa = p.kappa;
  const double lambda = p.lambda;

  const MatrixField eta_a = [kappa](const Point& r) { return exp_pauli_z(-2.0 * kappa * std::sin(r(0))); };
  const GradientField eta_a_grad = [kappa](const Point& r) {
    const double s = kappa * std::sin(r(0));
    return std::vector<Matrix>{-2.0 * kappa * std::cos(r(0)) * pauli_z() * exp_pauli_z(-2.0 * s)};
  };
  const MatrixField rho_a = [kappa](const Point& r) { return exp_pauli_z(-kappa * std::sin(r(0))); };
  const MatrixField conn_a = [kappa](const Point& r) -> Matrix {
    return Complex(0.0, kappa * std::cos(r(0))) * pauli_z();
  };

  BundleChart a;
  a.id = "a";
  a.dim_base = 1;
  a.fiber_dim = 2;
  a.eta_field = eta_a;
  a.eta_grad = eta_a_grad;
  a.connection = {conn_a};
  a.domain = [](const Point& r) { return r(0) > -1.0 && r(0) < 4.0; };

  const MatrixField g = [lambda](const Point& r) { return rotation_x(lambda * r(0)); };
  const GradientField g_grad = [lambda](const Point& r) {
    return std::vector<Matrix>{Complex(0.0, lambda) * pauli_x() * rotation_x(lambda * r(0))};
  };

  BundleChart b = gauge_transform(a, g, g_grad, "b");
  b.domain = [](const Point& r) { return r(0) > 3.0 && r(0) < 2.0 * std::numbers::pi + 1.0; };

  fx.charts.emplace("a", a);
  fx.charts.emplace("b", b);
  fx.transitions.push_back({"a", "b", g, g_grad});

  const MatrixField g_inv = [lambda](const Point& r) { return rotation_x(-lambda * r(0)); };
  const GradientField g_inv_grad = [lambda](const Point& r) {
    return std::vector<Matrix>{Complex(0.0, -lambda) * pauli_x() * rotation_x(-lambda * r(0))};
  };
  fx.transitions.push_back({"b", "a", g_inv, g_inv_grad});

  const double omega = p.omega;
  const double beta = p.beta;
  const MatrixField energy_a = [rho_a, omega, beta](const Point& r) -> Matrix {
    const Matrix herm = 0.5 * omega * pauli_z() + beta * std::cos(r(0)) * pauli_x();
    const Matrix rho = rho_a(r);
    return left_divide(rho, herm * rho);
  };
  const MatrixField observable_a = [rho_a](const Point& r) -> Matrix {
    const Matrix rho = rho_a(r);
    return left_divide(rho, pauli_y() * rho);
  };
  fx.energy.charts["a"] = energy_a;
  fx.observable.charts["a"] = observable_a;
  fx.energy = gauge_transform_section(fx.energy, "a", g, "b");
  fx.observable = gauge_transform_section(fx.observable, "a", g, "b");

  const double r0 = p.r0;
  const double speed = p.speed;
  const double start = p.t0;
  auto point = [r0, speed, start](double t) { return Point::Constant(1, r0 + speed * (t - start)); };
  auto velocity = [speed](double) { return Point::Constant(1, speed); };
  fx.curve.segments.push_back({"a", p.t0, p.t_junction, point, velocity});
  fx.curve.segments.push_back({"b", p.t_junction, p.t1, point, velocity});

  Vector v(2);
  v << 1.0, Complex(0.0, 1.0);
  fx.psi0 = {"a", point(p.t0), v / std::sqrt(2.0)};
  return fx;
}

}  // namespace geoqm
