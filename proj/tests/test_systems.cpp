#include <numbers>

#include "test_support.hpp"

using namespace geoqm;
using namespace geoqm::testing;

namespace {

// composite Simpson rule on [a, b], split at the given knots
Complex simpson(const std::function<Complex(double)>& f, double a, double b, std::vector<double> knots = {}) {
  std::vector<double> cuts{a};
  for (double k : knots) {
    if (k > a && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  Complex total{0.0, 0.0};
  const int n = 200;
  for (size_t s = 1; s < cuts.size(); ++s) {
    // nudge inward so one-sided values are sampled on each piece
    const double lo = cuts[s - 1] + 1e-13, hi = cuts[s] - 1e-13;
    const double h = (hi - lo) / n;
    Complex sum = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    total += sum * h / 3.0;
  }
  return total;
}

}  // namespace

TEST(IntroSystem, SpectrumAndMetric) {
  const IntroSystem sys(0.5);
  const auto es = eigen(sys.hamiltonian());
  std::vector<double> values{es.values(0).real(), es.values(1).real()};
  std::sort(values.begin(), values.end());
  EXPECT_NEAR(values[0], -1.0, 1e-14);
  EXPECT_NEAR(values[1], 1.0, 1e-14);
  EXPECT_TRUE(is_pseudo_hermitian(sys.hamiltonian(), IntroSystem::metric()).ok);
  EXPECT_FALSE(is_pseudo_hermitian(sys.hamiltonian(), MetricOperator::identity(2)).ok);
}

TEST(IntroSystem, ExpectationAtChi) {
  const IntroSystem sys(2.0);
  const Complex euclid = intro_expectation(sys, IntroSystem::chi());
  EXPECT_NEAR(euclid.real(), 0.0, 1e-15);
  EXPECT_NEAR(euclid.imag(), 3.0, 1e-14);
  const Complex eta = intro_expectation(sys, IntroSystem::chi(), IntroSystem::metric());
  EXPECT_NEAR(std::abs(eta), 0.0, 1e-15);
}

TEST(IntroSystem, Errors) {
  expect_error(Errc::ZeroState, [] { (void)intro_expectation(IntroSystem(), Vector::Zero(2)); });
  expect_error(Errc::DimensionMismatch, [] { (void)intro_expectation(IntroSystem(), Vector::Ones(3)); });
  expect_error(Errc::InvalidArgument, [] { IntroSystem(0.0); });
  expect_error(Errc::InvalidArgument, [] { IntroSystem(-1.0); });
}

TEST(Modulation, IntegralsMatchSimpson) {
  const std::vector<Modulation> drives{
      Modulation::constant({0.3, -0.2}),
      Modulation::exponential(std::polar(0.5, 0.7), 2.3),
      Modulation::exponential({0.1, 0.4}, 0.0),
      Modulation::piecewise({0.2, 0.5}, {Complex(1, 0), Complex(0, 1), Complex(-0.5, 0.5)}),
      Modulation::tabulated({0.0, 0.3, 0.8, 1.0}, {Complex(0, 0), Complex(1, 1), Complex(0.5, -1), Complex(2, 0)}),
  };
  for (const auto& f : drives) {
    std::vector<double> knots = f.kind == Modulation::Kind::piecewise ? f.breakpoints : f.sample_times;
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.1, 0.65}, std::pair{-0.5, 1.5}}) {
      const Complex want = simpson([&](double t) { return f.value(t); }, a, b, knots);
      EXPECT_LT(std::abs(f.integral(a, b) - want), 1e-9) << "kind " << static_cast<int>(f.kind) << " [" << a << "," << b << "]";
    }
  }
}

TEST(Modulation, ValueSemantics) {
  const auto pw = Modulation::piecewise({1.0}, {Complex(2, 0), Complex(3, 0)});
  EXPECT_EQ(pw.value(0.5), Complex(2, 0));
  EXPECT_EQ(pw.value(1.0), Complex(3, 0));
  const auto tab = Modulation::tabulated({0.0, 1.0}, {Complex(0, 0), Complex(2, 2)});
  EXPECT_EQ(tab.value(0.25), Complex(0.5, 0.5));
  EXPECT_EQ(tab.value(-1.0), Complex(0, 0));
  EXPECT_EQ(tab.value(5.0), Complex(2, 2));
  expect_error(Errc::InvalidArgument, [] { (void)Modulation::piecewise({1.0}, {Complex(1, 0)}); });
  expect_error(Errc::InvalidArgument, [] { (void)Modulation::tabulated({1.0, 0.0}, {Complex(1, 0), Complex(1, 0)}); });
}

TEST(OscillatorClosedForms, ZeroDriveIsFreeEvolution) {
  OscillatorParitySystem sys;
  sys.levels = 5;
  sys.f = Modulation::constant(0.0);
  const auto cf = osc_closed_forms(sys, 0.0, 0.8);
  EXPECT_LT(max_diff(cf.u, taylor_exp(-0.8 * kI * sys.h0())), 1e-14);
  EXPECT_LT(max_diff(cf.eta, identity(5)), 1e-15);
  EXPECT_LT(max_diff(cf.h, sys.h0()), 1e-15);
}

TEST(OscillatorClosedForms, ImaginaryConstantDrive) {
  OscillatorParitySystem sys;
  sys.levels = 5;
  const double c = 0.35, t = 0.9;
  sys.f = Modulation::constant({0.0, c});
  const auto cf = osc_closed_forms(sys, 0.0, t);
  EXPECT_LT(max_diff(cf.u, taylor_exp(-t * kI * sys.hamiltonian(0.0))), 1e-13);
  EXPECT_LT(max_diff(cf.eta, taylor_exp(-2.0 * c * t * sys.parity())), 1e-14);
  EXPECT_LT(max_diff(cf.rho * cf.rho, cf.eta), 1e-15);
  EXPECT_LT(max_diff(cf.h, sys.h0()), 1e-15);
  expect_error(Errc::InvalidArgument, [&] { (void)osc_closed_forms(sys, 1.0, 0.5); });
}

TEST(OscillatorClosedForms, HermitianRepresentativeSpectrum) {
  OscillatorParitySystem sys;
  sys.levels = 6;
  const double t = 0.4;
  const auto cf = osc_closed_forms(sys, 0.0, t);
  EXPECT_LT(hermiticity_residual(cf.h), 1e-15);
  const double re_f = sys.f.value(t).real();
  for (int n = 0; n < 6; ++n) {
    EXPECT_NEAR(cf.h(n, n).real(), sys.omega * (n + 0.5) + (n % 2 == 0 ? re_f : -re_f), 1e-14);
  }
}

TEST(OscillatorPositionMomentum, RealDriveGivesBareOperators) {
  OscillatorParitySystem sys;
  sys.levels = 6;
  sys.f = Modulation::constant(0.7);
  const auto [x, p] = osc_position_momentum(sys, 0.6);
  EXPECT_LT(max_diff(x, sys.position()), 1e-15);
  EXPECT_LT(max_diff(p, sys.momentum()), 1e-15);
}

TEST(OscillatorPositionMomentum, TwoLevelEntries) {
  OscillatorParitySystem sys;
  sys.levels = 2;
  const double t = 0.5;
  const double a = sys.big_f(t).imag();
  const Matrix x = osc_position_momentum(sys, t).first;
  EXPECT_NEAR(std::abs(x(0, 1) - std::exp(2.0 * a) / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(x(1, 0) - std::exp(-2.0 * a) / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_EQ(x(0, 0), Complex(0.0));
}

TEST(OscillatorPositionMomentum, EtaExpectationIsReal) {
  OscillatorParitySystem sys;
  sys.levels = 6;
  Gen gen(503);
  for (double t : {0.2, 0.7, 1.0}) {
    const MetricOperator eta(osc_closed_forms(sys, 0.0, t).eta);
    const auto [x, p] = osc_position_momentum(sys, t);
    for (int s = 0; s < 5; ++s) {
      const Vector psi = gen.vector(6);
      EXPECT_LT(std::abs(eta_expectation(eta, x, psi).imag()), 1e-13);
      EXPECT_LT(std::abs(eta_expectation(eta, p, psi).imag()), 1e-13);
    }
  }
}

TEST(OscillatorParitySystem, NotPseudoHermitianForRandomMetrics) {
  OscillatorParitySystem sys;
  sys.levels = 4;
  sys.f = Modulation::constant({0.5, 0.5});
  Gen gen(509);
  for (int trial = 0; trial < 10; ++trial) {
    EXPECT_FALSE(is_pseudo_hermitian(sys.hamiltonian(0.0), MetricOperator(gen.positive_definite(4))).ok);
  }
}

TEST(OscillatorParitySystem, LadderCommutator) {
  OscillatorParitySystem sys;
  sys.levels = 7;
  const Matrix a = sys.lowering();
  Matrix want = identity(7);
  want(6, 6) = -6.0;  // truncation artefact in the top level
  EXPECT_LT(max_diff(commutator(a, a.adjoint()), want), 1e-13);
  EXPECT_LT(hermiticity_residual(sys.position()), 1e-15);
  EXPECT_LT(hermiticity_residual(sys.momentum()), 1e-15);
  sys.levels = 0;
  expect_error(Errc::InvalidArgument, [&] { sys.validate(); });
}

TEST(TwoChartFixture, ChartsAndCurveAreValid) {
  const auto fx = two_chart_fixture();
  fx.curve.validate();
  std::vector<Point> a_pts, b_pts;
  for (double r : {-0.5, 0.5, 2.0, 3.5}) a_pts.push_back(Point::Constant(1, r));
  for (double r : {3.5, 5.0, 6.5}) b_pts.push_back(Point::Constant(1, r));
  validate_chart(fx.charts.at("a"), a_pts);
  validate_chart(fx.charts.at("b"), b_pts);
  EXPECT_TRUE(fx.charts.at("a").contains(fx.curve.segments[0].point(0.75)));
  EXPECT_TRUE(fx.charts.at("b").contains(fx.curve.segments[1].point(0.75)));
  EXPECT_GT(fiber_norm2(fx.charts.at("a"), fx.psi0), 0.0);
}

TEST(TwoChartFixture, GaugeImageChartClosedForm) {
  const auto fx = two_chart_fixture();
  const auto& b = fx.charts.at("b");
  const double kappa = fx.params.kappa, lambda = fx.params.lambda;
  for (double r : {3.3, 4.5, 6.0}) {
    const Point p = Point::Constant(1, r);
    const Matrix g = std::cos(lambda * r) * identity(2) + kI * std::sin(lambda * r) * sigma_x();
    const Matrix eta_a = diag({std::exp(-2.0 * kappa * std::sin(r)), std::exp(2.0 * kappa * std::sin(r))});
    EXPECT_LT(max_diff(b.eta_field(p), g * eta_a * g.adjoint()), 1e-14);  // g unitary
    const Matrix a_a = kI * kappa * std::cos(r) * sigma_z();
    EXPECT_LT(max_diff(b.connection[0](p), g * a_a * g.adjoint() - lambda * sigma_x()), 1e-14);
    EXPECT_LT(max_diff(b.eta_gradient(p)[0], field_gradient(b.eta_field, p, 1e-5)[0]), 1e-8);
    const MetricOperator m = b.metric(p);
    EXPECT_TRUE(is_pseudo_hermitian(fx.energy.at("b", p), m, 1e-12).ok);
    EXPECT_TRUE(is_pseudo_hermitian(fx.observable.at("b", p), m, 1e-12).ok);
  }
}
