// Standalone property battery: orthonormality, analytic-vs-finite-difference
// gradients, QRE non-negativity, flow inner-product preservation, softmax
// normalization, Jacobi vs closed forms, and bit-identical determinism.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "thermal/oracle.hpp"
#include "thermal/qml.hpp"
#include "thermal/qvi.hpp"

using namespace thermal;

TEST_CASE("orthonormality across supported configurations") {
  for (const BasisSet& basis :
       {BasisSet::hermite(10), BasisSet::hermite(40), BasisSet::fourier(40, 10.0),
        BasisSet::fourier(15, 6.0)}) {
    const int resolution = basis.family == BasisFamily::Fourier ? 2048 : 256;
    const Matrix gram = gram_matrix(basis, make_grid(basis, resolution));
    const Matrix dev = gram - Matrix::Identity(basis.size, basis.size);
    CHECK(dev.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("gradient checks: qvi, qml, and flow parameters") {
  auto gen = testutil::rng(901);
  const double tol = 1e-5;

  // One shared random configuration with a flow, exercised through both
  // objectives.
  const int m = 5, n = 2, nf = 9;
  VariationalDensityMatrix vdm;
  vdm.basis = BasisSet::hermite(m);
  vdm.coefficients = normalize_columns(testutil::random_matrix(gen, m, n));
  vdm.weights.temperature = 0.9;
  vdm.weights.logits = testutil::random_vector(gen, n);
  std::uniform_real_distribution<double> cdist(0.3, 0.7);
  Vector c(nf);
  for (int i = 0; i < nf; ++i) c[i] = cdist(gen);
  vdm.flow = FlowMap(FlowVariant::PaperSum, -5.0, 5.0, c);

  auto pack = [&](const VariationalDensityMatrix& v) {
    Vector p(m * n + n + nf);
    p.head(m * n) = Eigen::Map<const Vector>(v.coefficients.data(), m * n);
    p.segment(m * n, n) = v.weights.logits;
    p.tail(nf) = v.flow->coeffs;
    return p;
  };
  auto unpack = [&](const Vector& p) {
    VariationalDensityMatrix v = vdm;
    v.coefficients = Eigen::Map<const Matrix>(p.data(), m, n);
    v.weights.logits = p.segment(m * n, n);
    v.flow->coeffs = p.tail(nf);
    return v;
  };
  auto check_against_fd = [&](const Vector& analytic, const Vector& fd) {
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
      if (std::abs(analytic[i]) > 1e-8) {
        CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(tol));
      }
  };

  SUBCASE("qvi with flow") {
    const QviProblem problem(Potential::anharmonic_paper(), vdm.basis, make_grid(vdm.basis, 160));
    const QviGradients g = problem.gradient(vdm, 5.0);
    Vector analytic(m * n + n + nf);
    analytic.head(m * n) = Eigen::Map<const Vector>(g.coefficients.data(), m * n);
    analytic.segment(m * n, n) = g.logits;
    analytic.tail(nf) = g.flow;
    const Vector fd = finite_diff_gradient(
        [&](const Vector& p) { return problem.loss(unpack(p), 5.0).total; }, pack(vdm), 1e-6);
    check_against_fd(analytic, fd);
  }

  SUBCASE("qml with flow") {
    const Matrix endpoints = testutil::random_matrix(gen, 25, 2, 1.3);
    const QmlGradients g = qml_gradient(vdm, endpoints, 5.0, 1e-6);
    Vector analytic(m * n + n + nf);
    analytic.head(m * n) = Eigen::Map<const Vector>(g.coefficients.data(), m * n);
    analytic.segment(m * n, n) = g.logits;
    analytic.tail(nf) = g.flow;
    const Vector fd = finite_diff_gradient(
        [&](const Vector& p) { return qml_empirical_loss(unpack(p), endpoints, 5.0, 1e-6).total; },
        pack(vdm), 1e-6);
    check_against_fd(analytic, fd);
  }

  SUBCASE("flow map parameters directly") {
    const double x = 0.83;
    const Vector g = flow_param_gradient(*vdm.flow, x);
    const Vector fd = finite_diff_gradient(
        [&](const Vector& p) {
          FlowMap f = *vdm.flow;
          f.coeffs = p;
          return flow_forward(f, x);
        },
        vdm.flow->coeffs, 1e-6);
    check_against_fd(g, fd);
  }
}

TEST_CASE("qre non-negativity over random pairs") {
  auto gen = testutil::rng(902);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector p = testutil::random_vector(gen, 6).array().abs() + 1e-6;
    Vector q = testutil::random_vector(gen, 6).array().abs() + 1e-6;
    p /= p.sum();
    q /= q.sum();
    CHECK(qre_diag(p, q) >= -1e-14);
  }
}

TEST_CASE("flow inner-product preservation for the bijective variant") {
  auto gen = testutil::rng(903);
  std::uniform_real_distribution<double> cdist(0.0, 0.04);
  Vector c(81);
  for (int i = 0; i < 81; ++i) c[i] = cdist(gen);
  const FlowMap flow(FlowVariant::AffinePlusSum, -7.0, 7.0, c);
  const BasisSet basis = BasisSet::hermite(6);
  const FlowedBasisValues fb = flowed_basis_values(basis, flow, make_grid(basis, 2048, 16.0).nodes);
  const QuadratureGrid grid = make_grid(basis, 2048, 16.0);
  const Matrix gram = fb.values * grid.weights.asDiagonal() * fb.values.transpose();
  CHECK((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("softmax normalization") {
  auto gen = testutil::rng(904);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector p = softmax_weights(testutil::random_vector(gen, 1 + trial % 12, 10.0));
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_CASE("jacobi matches closed forms in two and three dimensions") {
  auto gen = testutil::rng(905);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a2 = testutil::random_matrix(gen, 2, 2);
    a2 = ((a2 + a2.transpose()) / 2.0).eval();
    const SpectrumResult r2 = jacobi_diagonalize(a2);
    const double tr = a2.trace(), det = a2.determinant();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    CHECK(r2.eigenvalues[0] == doctest::Approx(tr / 2.0 - disc).epsilon(1e-10));
    CHECK(r2.eigenvalues[1] == doctest::Approx(tr / 2.0 + disc).epsilon(1e-10));

    Matrix a3 = testutil::random_matrix(gen, 3, 3);
    a3 = ((a3 + a3.transpose()) / 2.0).eval();
    const SpectrumResult r3 = jacobi_diagonalize(a3);
    const Vector expected = testutil::symmetric_3x3_eigenvalues(a3);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(r3.eigenvalues[i] - expected[i]) <= 1e-10 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("determinism: bit-identical reruns across the stack") {
  // Sampler.
  ActionConfig cfg;
  cfg.beta = 2.0;
  cfg.n_slices = 8;
  cfg.potential = Potential::anharmonic_paper();
  cfg.boundary = Boundary::Open;
  const OpenSamples s1 = sample_open_paths(cfg, 400, 50, 1, 123);
  const OpenSamples s2 = sample_open_paths(cfg, 400, 50, 1, 123);
  CHECK((s1.endpoints - s2.endpoints).cwiseAbs().maxCoeff() == 0.0);

  // QVI.
  QviConfig qvi;
  qvi.basis = BasisSet::hermite(5);
  qvi.grid_resolution = 128;
  qvi.n_states = 2;
  qvi.max_steps = 150;
  const SpectrumResult q1 = train_qvi(qvi, Potential::anharmonic_paper(), 7);
  const SpectrumResult q2 = train_qvi(qvi, Potential::anharmonic_paper(), 7);
  CHECK((q1.eigenvalues - q2.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q1.eigenvectors - q2.eigenvectors).cwiseAbs().maxCoeff() == 0.0);

  // QML on a fixed bank.
  QmlConfig qml;
  qml.beta = 1.0;
  qml.basis = BasisSet::hermite(4);
  qml.n_states = 2;
  qml.max_steps = 100;
  const SpectrumResult m1 = train_qml(qml, bank_batch_source(s1.endpoints, 3), 3);
  const SpectrumResult m2 = train_qml(qml, bank_batch_source(s2.endpoints, 3), 3);
  CHECK((m1.gaps - m2.gaps).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m1.eigenvectors - m2.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
}
