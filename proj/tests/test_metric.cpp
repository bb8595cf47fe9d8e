#include "test_support.hpp"

using namespace geoqm;
using namespace geoqm::testing;

TEST(MetricOperator, CachesRootAndInverse) {
  Gen gen(101);
  for (int trial = 0; trial < 5; ++trial) {
    const MetricOperator m(gen.positive_definite(4));
    EXPECT_LT(max_diff(m.rho() * m.rho(), m.eta()), 1e-12);
    EXPECT_LT(max_diff(m.rho() * m.rho_inv(), identity(4)), 1e-12);
    EXPECT_LT(max_diff(m.eta() * m.eta_inv(), identity(4)), 1e-11);
  }
}

TEST(MetricOperator, RejectsInvalidInput) {
  expect_error(Errc::NotPositiveDefinite, [] { MetricOperator(mat2(1, 0.3, 0, 1)); });
  expect_error(Errc::NotPositiveDefinite, [] { MetricOperator(diag({1.0, -1.0})); });
  expect_error(Errc::NotPositiveDefinite, [] { MetricOperator(diag({1.0, std::nan("")})); });
  expect_error(Errc::DimensionMismatch, [] { MetricOperator(Matrix::Zero(2, 3)); });
}

TEST(EtaInner, Examples) {
  const MetricOperator eta(diag({1.0, 0.25}));
  EXPECT_EQ(eta_inner(eta, vec2(0, 2), vec2(0, 2)), Complex(1.0, 0.0));
  EXPECT_EQ(eta_inner(eta, vec2(1, 0), vec2(0, 1)), Complex(0.0, 0.0));
  Gen gen(103);
  const Vector z = gen.vector(3), x = gen.vector(3);
  EXPECT_LT(std::abs(eta_inner(MetricOperator::identity(3), z, x) - z.dot(x)), 1e-15);
  expect_error(Errc::DimensionMismatch, [&] { (void)eta_inner(eta, z, x); });
}

TEST(EtaInner, ConjugateSymmetricAndPositive) {
  Gen gen(107);
  for (int trial = 0; trial < 20; ++trial) {
    const MetricOperator eta(gen.positive_definite(4));
    const Vector z = gen.vector(4), x = gen.vector(4);
    EXPECT_LT(std::abs(eta_inner(eta, z, x) - std::conj(eta_inner(eta, x, z))), 1e-13);
    const Complex nn = eta_inner(eta, z, z);
    EXPECT_GT(nn.real(), 0.0);
    EXPECT_LT(std::abs(nn.imag()), 1e-13);
  }
}

TEST(PseudoAdjoint, Examples) {
  const Matrix h = IntroSystem(1.3).hamiltonian();
  EXPECT_LT(max_diff(pseudo_adjoint(h, IntroSystem::metric()), h), 1e-15);
  Gen gen(109);
  const Matrix m = gen.matrix(3);
  EXPECT_LT(max_diff(pseudo_adjoint(m, MetricOperator::identity(3)), m.adjoint()), 1e-15);
}

TEST(PseudoAdjoint, DefiningIdentityOnRandomData) {
  Gen gen(113);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = gen.matrix(3);
    const MetricOperator eta(gen.positive_definite(3));
    const Vector z = gen.vector(3), x = gen.vector(3);
    EXPECT_LT(std::abs(eta_inner(eta, z, pseudo_adjoint(h, eta) * x) - eta_inner(eta, h * z, x)), 1e-11);
    EXPECT_LT(max_diff(pseudo_adjoint(pseudo_adjoint(h, eta), eta), h), 1e-11);
  }
}

TEST(IsPseudoHermitian, Examples) {
  const auto ok = is_pseudo_hermitian(IntroSystem().hamiltonian(), IntroSystem::metric());
  EXPECT_TRUE(ok.ok);
  EXPECT_EQ(ok.residual, 0.0);
  EXPECT_FALSE(is_pseudo_hermitian(mat2(0, 1, 0, 0), MetricOperator::identity(2)).ok);
  OscillatorParitySystem sys;
  sys.f = Modulation::constant({0.4, 0.7});
  EXPECT_FALSE(is_pseudo_hermitian(sys.hamiltonian(0.2), MetricOperator::identity(sys.levels)).ok);
}

TEST(SpectralMetric, IntroIsProportionalToDiagOneQuarter) {
  const Matrix eta = spectral_metric(eigen(IntroSystem().hamiltonian())).eta();
  EXPECT_LT(max_diff(eta / eta(0, 0), diag({1.0, 0.25})), 1e-14);
}

TEST(SpectralMetric, HandBiorthonormalSystem) {
  // right vectors (1,2), (1,-2); left vectors (1/2,1/4), (1/2,-1/4)
  EigenSystem es;
  es.values = vec2(2.0, -2.0);
  es.right = mat2(1, 1, 2, -2);
  es.left = mat2(0.5, 0.5, 0.25, -0.25);
  EXPECT_LT(biorthonormality_residual(es), 1e-15);
  EXPECT_LT(max_diff(spectral_metric(es).eta(), diag({0.5, 0.125})), 1e-15);
}

TEST(SpectralMetric, HermitianInputGivesIdentity) {
  Gen gen(127);
  const Matrix h = gen.hermitian(5);
  EXPECT_LT(max_diff(spectral_metric(eigen(h)).eta(), identity(5)), 1e-12);
}

TEST(SpectralMetric, QuasiHermitianConstructionIsPseudoHermitian) {
  Gen gen(131);
  for (int trial = 0; trial < 10; ++trial) {
    Vector lambda(4);
    for (int i = 0; i < 4; ++i) lambda(i) = gen.real(-3.0, 3.0);
    const Matrix s = gen.invertible(4);
    const Matrix h = s.inverse() * lambda.asDiagonal() * s;
    const MetricOperator eta = spectral_metric(eigen(h));
    EXPECT_LT(max_diff(h.adjoint() * eta.eta(), eta.eta() * h), 1e-8);
    EXPECT_TRUE(is_pseudo_hermitian(h, eta, 1e-8).ok);

    Eigen::VectorXd w(4);
    w << 1.0, 2.0, 0.5, 3.0;
    const MetricOperator weighted = spectral_metric(eigen(h), w);
    EXPECT_LT(max_diff(h.adjoint() * weighted.eta(), weighted.eta() * h), 1e-8);
  }
}

TEST(SpectralMetric, Errors) {
  expect_error(Errc::ComplexSpectrum, [] { (void)spectral_metric(eigen(mat2(0, 1, -1, 0))); });
  const auto es = eigen(diag({1.0, 2.0}));
  expect_error(Errc::NotPositiveDefinite, [&] { (void)spectral_metric(es, Eigen::Vector2d(1.0, -1.0)); });
  expect_error(Errc::DimensionMismatch, [&] { (void)spectral_metric(es, Eigen::Vector3d(1.0, 1.0, 1.0)); });
}

TEST(ToHermitianRep, IntroUsesRhoHRhoInverse) {
  const double eps = 0.7;
  const Matrix h = to_hermitian_rep(IntroSystem(eps).hamiltonian(), IntroSystem::metric());
  EXPECT_LT(max_diff(h, mat2(0, 2.0 * eps, 2.0 * eps, 0)), 1e-15);
}

TEST(ToHermitianRep, IdentityMetricAndIsospectrality) {
  Gen gen(137);
  const Matrix herm = gen.hermitian(3);
  EXPECT_LT(max_diff(to_hermitian_rep(herm, MetricOperator::identity(3)), herm), 1e-15);
  for (int trial = 0; trial < 5; ++trial) {
    Vector lambda(4);
    for (int i = 0; i < 4; ++i) lambda(i) = -2.0 + i + gen.real(0.0, 0.5);
    const Matrix s = gen.invertible(4);
    const Matrix h = s.inverse() * lambda.asDiagonal() * s;
    const Matrix rep = to_hermitian_rep(h, spectral_metric(eigen(h)), 1e-7);
    EXPECT_LT(hermiticity_residual(rep), 1e-9);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rep + rep.adjoint()));
    std::vector<double> want(lambda.size());
    for (int i = 0; i < 4; ++i) want[i] = lambda(i).real();
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(es.eigenvalues()(i), want[i], 1e-9);
  }
  expect_error(Errc::NotPseudoHermitian, [] { (void)to_hermitian_rep(mat2(0, 1, 0, 0), MetricOperator::identity(2)); });
}

TEST(PseudoHermitian, ExpectationValuesAreReal) {
  Gen gen(139);
  for (int trial = 0; trial < 10; ++trial) {
    const MetricOperator eta(gen.positive_definite(3));
    // H = eta^{-1} K with K Hermitian is eta-pseudo-Hermitian
    const Matrix h = eta.eta_inv() * gen.hermitian(3);
    for (int s = 0; s < 10; ++s) {
      const Vector xi = gen.vector(3);
      EXPECT_LT(std::abs(eta_inner(eta, xi, h * xi).imag()), 1e-10);
    }
  }
}

TEST(Representations, ExpectationOfRhoConjugateMatches) {
  Gen gen(149);
  const MetricOperator eta(gen.positive_definite(4));
  const Matrix o = gen.hermitian(4);
  const Matrix big_o = eta.rho_inv() * o * eta.rho();
  for (int s = 0; s < 10; ++s) {
    const Vector psi = gen.vector(4);
    const Vector phi = eta.rho() * psi;
    EXPECT_LT(std::abs(eta_expectation(eta, big_o, psi) - phi.dot(o * phi) / phi.squaredNorm()), 1e-10);
  }
  expect_error(Errc::ZeroState, [&] { (void)eta_expectation(eta, o, Vector::Zero(4)); });
}
