#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "thermal/qml.hpp"

using namespace thermal;

namespace {

VariationalDensityMatrix hermite_vdm(int m, int n, double beta) {
  VariationalDensityMatrix vdm;
  vdm.basis = BasisSet::hermite(m);
  vdm.coefficients = Matrix::Identity(m, n);
  vdm.weights.temperature = 1.0 / beta;
  vdm.weights.logits = Vector::Zero(n);
  for (int k = 0; k < n; ++k) vdm.weights.logits[k] = -double(k);
  return vdm;
}

Matrix harmonic_endpoint_bank(double beta, long n_paths, std::uint64_t seed, int n_slices = 16) {
  ActionConfig cfg;
  cfg.beta = beta;
  cfg.n_slices = n_slices;
  cfg.potential = Potential::harmonic();
  cfg.boundary = Boundary::Open;
  return sample_open_paths(cfg, n_paths, 2000, 2, seed, 1.3).endpoints;
}

}  // namespace

TEST_CASE("state amplitude") {
  const VariationalDensityMatrix vdm = hermite_vdm(10, 3, 1.0);
  CHECK(state_amplitude(vdm, 0, 0.7) == doctest::Approx(hermite_function(0, 0.7)).epsilon(1e-14));

  VariationalDensityMatrix mixed = hermite_vdm(2, 1, 1.0);
  mixed.coefficients << 0.6, 0.8;
  CHECK(state_amplitude(mixed, 0, 0.0) ==
        doctest::Approx(0.6 * hermite_function(0, 0.0)).epsilon(1e-14));
}

TEST_CASE("flowed amplitude equals the composed definition") {
  auto gen = testutil::rng(81);
  std::uniform_real_distribution<double> cdist(0.02, 0.08);
  VariationalDensityMatrix vdm = hermite_vdm(6, 3, 1.0);
  vdm.coefficients = normalize_columns(testutil::random_matrix(gen, 6, 3));
  Vector c(31);
  for (int i = 0; i < 31; ++i) c[i] = cdist(gen);
  vdm.flow = FlowMap(FlowVariant::PaperSum, -8.0, 8.0, c);

  std::uniform_real_distribution<double> xs(-4.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = xs(gen);
    const int n = trial % 3;
    double composed = 0.0;
    for (int j = 0; j < 6; ++j)
      composed += vdm.coefficients(j, n) *
                  apply_flow(*vdm.flow, [&](double u) { return hermite_function(j, u); }, x);
    CHECK(state_amplitude(vdm, n, x) == doctest::Approx(composed).epsilon(1e-12));
  }
}

TEST_CASE("loss on a single endpoint pair follows the closed formula") {
  const double p_perp = 1e-6;
  Matrix endpoints(1, 2);
  endpoints << 0.4, -0.3;

  // N = 1: the softmax weight is exactly 1.
  const VariationalDensityMatrix one = hermite_vdm(4, 1, 1.0);
  const QmlTerms t1 = qml_empirical_loss(one, endpoints, 0.0, p_perp);
  const double proj = hermite_function(0, -0.3) * hermite_function(0, 0.4);
  CHECK(t1.total ==
        doctest::Approx(-(std::log(p_perp) + std::log(1.0 / p_perp) * proj)).epsilon(1e-12));

  // N = 2 with p = (0.9, 0.1).
  VariationalDensityMatrix two = hermite_vdm(4, 2, 1.0);
  two.weights.logits << std::log(0.9), std::log(0.1);
  const QmlTerms t2 = qml_empirical_loss(two, endpoints, 0.0, p_perp);
  double expected = -std::log(p_perp);
  const double pr0 = hermite_function(0, -0.3) * hermite_function(0, 0.4);
  const double pr1 = hermite_function(1, -0.3) * hermite_function(1, 0.4);
  expected -= std::log(0.9 / p_perp) * pr0 + std::log(0.1 / p_perp) * pr1;
  CHECK(t2.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("vanishing projections leave only the complement term") {
  // Fourier states are zero outside the box, so endpoints beyond L project to
  // nothing and the loss cannot see the logits: the collapse mode the
  // complement regularizer penalizes.
  VariationalDensityMatrix vdm;
  vdm.basis = BasisSet::fourier(6, 5.0);
  vdm.coefficients = Matrix::Identity(6, 3);
  vdm.weights.temperature = 1.0;
  vdm.weights.logits = Vector::Zero(3);

  Matrix endpoints(2, 2);
  endpoints << 6.0, 7.0, -8.0, 9.0;
  const double p_perp = 1e-6;
  const QmlTerms a = qml_empirical_loss(vdm, endpoints, 5.0, p_perp);
  CHECK(a.total == doctest::Approx(-std::log(p_perp)).epsilon(1e-12));

  vdm.weights.logits << 3.0, -1.0, 0.4;
  const QmlTerms b = qml_empirical_loss(vdm, endpoints, 5.0, p_perp);
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("random batch agrees with a brute-force double loop") {
  auto gen = testutil::rng(82);
  VariationalDensityMatrix vdm = hermite_vdm(7, 4, 2.0);
  vdm.coefficients = normalize_columns(testutil::random_matrix(gen, 7, 4));
  vdm.weights.logits = testutil::random_vector(gen, 4);
  const Matrix endpoints = testutil::random_matrix(gen, 100, 2, 1.5);
  const double c_perp = 11.0, p_perp = 1e-5;

  const QmlTerms terms = qml_empirical_loss(vdm, endpoints, c_perp, p_perp);
  const Vector p = softmax_weights(vdm.weights.logits);
  double brute = -std::log(p_perp);
  for (int i = 0; i < 100; ++i)
    for (int n = 0; n < 4; ++n)
      brute -= std::log(p[n] / p_perp) * state_amplitude(vdm, n, endpoints(i, 1)) *
               state_amplitude(vdm, n, endpoints(i, 0)) / 100.0;
  brute += c_perp * orthogonality_penalty(vdm.coefficients);
  CHECK(terms.total == doctest::Approx(brute).epsilon(1e-12));

  // Loss decomposition: the reported pieces rebuild the total exactly.
  CHECK(terms.total ==
        doctest::Approx(terms.complement + terms.projection + terms.penalty).epsilon(1e-12));
}

TEST_CASE("gradient on an empty batch is the penalty gradient") {
  auto gen = testutil::rng(83);
  VariationalDensityMatrix vdm = hermite_vdm(5, 3, 1.0);
  vdm.coefficients = normalize_columns(testutil::random_matrix(gen, 5, 3));
  const Matrix empty(0, 2);
  const QmlGradients g = qml_gradient(vdm, empty, 9.0, 1e-6);
  const Matrix expected = 9.0 * orthogonality_penalty_gradient(vdm.coefficients);
  CHECK((g.coefficients - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.logits.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("logit gradient components sum to zero") {
  auto gen = testutil::rng(84);
  VariationalDensityMatrix vdm = hermite_vdm(6, 4, 1.0);
  vdm.coefficients = normalize_columns(testutil::random_matrix(gen, 6, 4));
  vdm.weights.logits = testutil::random_vector(gen, 4);
  const Matrix endpoints = testutil::random_matrix(gen, 60, 2, 1.2);
  const QmlGradients g = qml_gradient(vdm, endpoints, 2.0, 1e-6);
  CHECK(std::abs(g.logits.sum()) < 1e-14);
}

TEST_CASE("gradients match finite differences") {
  auto gen = testutil::rng(85);
  const double c_perp = 4.0, p_perp = 1e-6;

  SUBCASE("hermite mixture") {
    VariationalDensityMatrix vdm = hermite_vdm(6, 3, 1.0);
    vdm.coefficients = normalize_columns(testutil::random_matrix(gen, 6, 3));
    vdm.weights.logits = testutil::random_vector(gen, 3);
    const Matrix endpoints = testutil::random_matrix(gen, 40, 2, 1.5);
    const QmlGradients g = qml_gradient(vdm, endpoints, c_perp, p_perp);

    const int m = 6, n = 3;
    auto loss_at = [&](const Vector& params) {
      VariationalDensityMatrix probe = vdm;
      probe.coefficients = Eigen::Map<const Matrix>(params.data(), m, n);
      probe.weights.logits = params.tail(n);
      return qml_empirical_loss(probe, endpoints, c_perp, p_perp).total;
    };
    Vector params(m * n + n);
    params.head(m * n) = Eigen::Map<const Vector>(vdm.coefficients.data(), m * n);
    params.tail(n) = vdm.weights.logits;
    const Vector fd = finite_diff_gradient(loss_at, params);
    Vector analytic(m * n + n);
    analytic.head(m * n) = Eigen::Map<const Vector>(g.coefficients.data(), m * n);
    analytic.tail(n) = g.logits;
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
      if (std::abs(analytic[i]) > 1e-8) {
        CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-5));
      }
  }

  SUBCASE("with a shared flow") {
    VariationalDensityMatrix vdm = hermite_vdm(5, 2, 1.0);
    vdm.coefficients = normalize_columns(testutil::random_matrix(gen, 5, 2));
    vdm.weights.logits = testutil::random_vector(gen, 2);
    std::uniform_real_distribution<double> cdist(0.2, 0.6);
    Vector c(11);
    for (int i = 0; i < 11; ++i) c[i] = cdist(gen);
    vdm.flow = FlowMap(FlowVariant::PaperSum, -5.0, 5.0, c);
    const Matrix endpoints = testutil::random_matrix(gen, 30, 2, 1.5);
    const QmlGradients g = qml_gradient(vdm, endpoints, c_perp, p_perp);

    const int m = 5, n = 2, nf = 11;
    auto loss_at = [&](const Vector& params) {
      VariationalDensityMatrix probe = vdm;
      probe.coefficients = Eigen::Map<const Matrix>(params.data(), m, n);
      probe.weights.logits = params.segment(m * n, n);
      probe.flow->coeffs = params.tail(nf);
      return qml_empirical_loss(probe, endpoints, c_perp, p_perp).total;
    };
    Vector params(m * n + n + nf);
    params.head(m * n) = Eigen::Map<const Vector>(vdm.coefficients.data(), m * n);
    params.segment(m * n, n) = vdm.weights.logits;
    params.tail(nf) = vdm.flow->coeffs;
    const Vector fd = finite_diff_gradient(loss_at, params, 1e-6);
    Vector analytic(m * n + n + nf);
    analytic.head(m * n) = Eigen::Map<const Vector>(g.coefficients.data(), m * n);
    analytic.segment(m * n, n) = g.logits;
    analytic.tail(nf) = g.flow;
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
      if (std::abs(analytic[i]) > 1e-8) {
        CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-5));
      }
  }
}

TEST_CASE("pushing a populated weight toward p_perp raises the loss") {
  auto gen = testutil::rng(86);
  VariationalDensityMatrix vdm = hermite_vdm(5, 3, 1.0);
  const Matrix endpoints = testutil::random_matrix(gen, 200, 2, 0.8);

  // State 0 has a positive average projection for near-Gaussian endpoints.
  double prev = qml_empirical_loss(vdm, endpoints, 0.0, 1e-6).total;
  for (double drop = 1.0; drop < 8.0; drop += 1.0) {
    VariationalDensityMatrix probe = vdm;
    probe.weights.logits[0] -= drop;
    const double cur = qml_empirical_loss(probe, endpoints, 0.0, 1e-6).total;
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("batch-average projections reproduce the Boltzmann ratio") {
  const double beta = 1.0;
  const Matrix bank = harmonic_endpoint_bank(beta, 100000, 404);
  const VariationalDensityMatrix vdm = hermite_vdm(3, 2, beta);

  Vector proj = Vector::Zero(2);
  for (Eigen::Index i = 0; i < bank.rows(); ++i)
    for (int n = 0; n < 2; ++n)
      proj[n] += state_amplitude(vdm, n, bank(i, 1)) * state_amplitude(vdm, n, bank(i, 0));
  proj /= double(bank.rows());
  CHECK(proj[1] / proj[0] == doctest::Approx(std::exp(-beta)).epsilon(0.08));
}

TEST_CASE("training on harmonic endpoints recovers the low gaps") {
  // beta = 1 keeps the excited-state projections resolvable above the Monte
  // Carlo noise floor (at beta = 10 the state-1 signal is e^-10 of the ground
  // state and cannot be learned at this sample budget).
  const double beta = 1.0;
  QmlConfig cfg;
  cfg.beta = beta;
  cfg.basis = BasisSet::hermite(10);
  cfg.n_states = 3;
  cfg.c_perp = 100.0;
  cfg.batch_size = 500;
  cfg.max_steps = 20000;
  const Matrix bank = harmonic_endpoint_bank(beta, 100000, 17);
  const SpectrumResult r = train_qml(cfg, bank_batch_source(bank, 5), 5);
  CHECK(r.gaps[0] == doctest::Approx(0.0));
  CHECK(r.gaps[1] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.gaps[2] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r.diagnostics.at("l_perp") < 1e-3);
}

TEST_CASE("training is deterministic per seed") {
  const double beta = 1.0;
  QmlConfig cfg;
  cfg.beta = beta;
  cfg.basis = BasisSet::hermite(6);
  cfg.n_states = 2;
  cfg.max_steps = 200;
  const Matrix bank = harmonic_endpoint_bank(beta, 5000, 21);
  const SpectrumResult a = train_qml(cfg, bank_batch_source(bank, 9), 9);
  const SpectrumResult b = train_qml(cfg, bank_batch_source(bank, 9), 9);
  CHECK((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.gaps - b.gaps).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("flow-only family keeps identity mixing") {
  const double beta = 1.0;
  QmlConfig cfg;
  cfg.beta = beta;
  cfg.basis = BasisSet::hermite(4);
  cfg.n_states = 2;
  cfg.family = QmlFamily::FlowOnly;
  cfg.max_steps = 100;
  cfg.flow_nodes = 20;
  const Matrix bank = harmonic_endpoint_bank(beta, 4000, 33);
  const SpectrumResult r = train_qml(cfg, bank_batch_source(bank, 4), 4);
  // Mixing stays the identity; only the flow and logits moved.
  CHECK((r.eigenvectors - Matrix::Identity(4, 2)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(r.flow.has_value());
}
