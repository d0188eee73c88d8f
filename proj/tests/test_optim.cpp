#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "thermal/optim.hpp"

using namespace thermal;

TEST_CASE("zero gradient leaves parameters unchanged, moments decay") {
  AdamState state(3);
  state.first_moment.setConstant(0.5);
  state.second_moment.setConstant(0.25);
  Vector params = Vector::Ones(3);
  const Vector before = params;
  adam_step(state, params, Vector::Zero(3));
  // m decays toward zero, so the step is nonzero only through stale momentum;
  // with fresh moments the parameters stay put.
  AdamState fresh(3);
  Vector p2 = Vector::Ones(3);
  adam_step(fresh, p2, Vector::Zero(3));
  CHECK((p2 - before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.first_moment[0] == doctest::Approx(0.45));
  CHECK(state.second_moment[0] == doctest::Approx(0.25 * 0.999));
}

TEST_CASE("constant gradient drives the update magnitude to the learning rate") {
  AdamState state(1);
  Vector params = Vector::Zero(1);
  const Vector grad = Vector::Constant(1, 0.37);
  double last_update = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double before = params[0];
    adam_step(state, params, grad);
    last_update = std::abs(params[0] - before);
    CHECK(last_update <= 2.0 * state.config.learning_rate);
  }
  CHECK(last_update == doctest::Approx(state.config.learning_rate).epsilon(0.01));
}

TEST_CASE("quadratic bowl converges") {
  AdamState state(4);
  auto gen = testutil::rng(31);
  Vector params = testutil::random_vector(gen, 4);
  params *= 1.0 / params.norm();
  for (int i = 0; i < 20000; ++i) {
    const Vector grad = params;  // f = ||p||^2 / 2
    adam_step(state, params, grad);
  }
  CHECK(params.norm() < 1e-3);
}

TEST_CASE("adam rejects bad inputs") {
  AdamState state(2);
  Vector params = Vector::Zero(2);
  CHECK_THROWS_AS(adam_step(state, params, Vector::Zero(3)), std::invalid_argument);
  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(state, params, bad), doctest::Contains("diverged"),
                       std::runtime_error);
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    AdamState state(3);
    auto gen = testutil::rng(32);
    Vector params = testutil::random_vector(gen, 3);
    for (int i = 0; i < 500; ++i) {
      const Vector grad = 2.0 * params + Vector::Constant(3, 0.1);
      adam_step(state, params, grad);
    }
    return params;
  };
  const Vector a = run();
  const Vector b = run();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite difference gradient") {
  auto f = [](const Vector& p) { return p.squaredNorm(); };
  Vector at(2);
  at << 1.0, 2.0;
  const Vector g = finite_diff_gradient(f, at);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));

  const Vector zero = finite_diff_gradient([](const Vector&) { return 3.5; }, at);
  CHECK(zero.cwiseAbs().maxCoeff() < 1e-10);
}
