#include <doctest.h>

#include <cmath>
#include <random>

#include "inspag/error.hpp"
#include "inspag/hyperfast.hpp"
#include "inspag/reference.hpp"
#include "test_support.hpp"

using namespace inspag;

namespace {

// sum_i x_i^4 / 4 plus (a/2)||x||^2; fourth derivative 6.
SmoothOracle quartic_oracle(double a) {
  SmoothOracle f;
  f.value = [a](const Vec& x) { return 0.25 * x.array().pow(4).sum() + 0.5 * a * x.squaredNorm(); };
  f.grad = [a](const Vec& x) -> Vec { return x.array().cube().matrix() + a * x; };
  f.hvp = [a](const Vec& x, const Vec& v) -> Vec {
    return (3.0 * x.array().square() * v.array()).matrix() + a * v;
  };
  f.d3_bilinear = [](const Vec& x, const Vec& h) -> Vec {
    return (6.0 * x.array() * h.array().square()).matrix();
  };
  f.l3 = 6.0;
  return f;
}

SmoothOracle quadratic_oracle(const Mat& Q, const Vec& b, double l3) {
  SmoothOracle f;
  f.value = [Q, b](const Vec& x) { return 0.5 * x.dot(Q * x) - b.dot(x); };
  f.grad = [Q, b](const Vec& x) -> Vec { return Q * x - b; };
  f.hvp = [Q](const Vec&, const Vec& v) -> Vec { return Q * v; };
  f.d3_bilinear = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  f.l3 = l3;
  return f;
}

LogRegProblem small_logistic() {
  auto data = generate_synthetic(1, 500, 3, 1.0);
  return LogRegProblem(data, 1e-3, 1e-3, sparse_feature_mask(data));
}

}  // namespace

TEST_CASE("tensor step at a stationary point stays put") {
  auto f = quartic_oracle(1.0);
  auto r = tensor_step(f, Vec::Zero(2), 6.0);
  CHECK(r.y.norm() == 0.0);
  CHECK(r.model_value == 0.0);
}

TEST_CASE("tensor step on x^4/4 from x = 1") {
  // Omega'(h) = 1 + 3h + 3h^2 + 3h^3 with L = 6.
  auto f = quartic_oracle(0.0);
  auto r = tensor_step(f, Vec::Ones(1), 6.0);
  CHECK(r.converged);
  CHECK(r.y[0] - 1.0 == doctest::Approx(-0.442493334024442).epsilon(1e-8));
  CHECK(tensor_model(f, Vec::Ones(1), 6.0, r.y) < 0.0);
}

TEST_CASE("small regularization on a quadratic is a Newton step") {
  std::mt19937_64 rng(3);
  Mat B(4, 4);
  for (Index j = 0; j < 4; ++j) B.col(j) = testsupport::gaussian_vec(rng, 4);
  Mat Q = B * B.transpose() + Mat::Identity(4, 4);
  Vec b = testsupport::gaussian_vec(rng, 4);
  auto f = quadratic_oracle(Q, b, 1.0);
  Vec x0 = Vec::Zero(4);
  auto r = tensor_step(f, x0, 1e-12);
  Vec newton = Q.ldlt().solve(b);
  CHECK((r.y - newton).norm() <= 1e-7 * newton.norm());
}

TEST_CASE("property: tensor model decreases and upper-bounds the objective") {
  auto p = small_logistic();
  auto f = logistic_oracle(p);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 15; ++rep) {
    Vec x = testsupport::gaussian_vec(rng, 3, 3.0);
    auto r = tensor_step(f, x, f.l3);
    CHECK(r.model_value <= 0.0);
    CHECK(r.monotone);
    CHECK(f.value(r.y) <= f.value(x) + r.model_value + 1e-12 * std::abs(f.value(x)));
    CHECK(tensor_model(f, x, f.l3, r.y) == doctest::Approx(r.model_value).epsilon(1e-9));
  }
  CHECK_THROWS_AS(tensor_step(f, Vec::Zero(3), 0.0), InputError);
}

TEST_CASE("dense Hessian from hvp columns matches the closed form") {
  auto p = small_logistic();
  auto f = logistic_oracle(p);
  Vec x = Vec::Ones(3);
  SmoothOracle g = f;
  g.hessian = nullptr;
  CHECK((dense_hessian(g, x) - hessian_dense(p, x)).norm() <= 1e-13);
}

TEST_CASE("accelerated tensor method meets its rate envelope") {
  auto p = small_logistic();
  auto f = logistic_oracle(p);
  auto ref = reference_solve(p);
  Vec z0 = Vec::Zero(3);
  double R0 = (z0 - ref.x).norm();
  for (int N : {5, 10, 20}) {
    Vec z = basic_hyperfast(f, z0, N);
    CHECK(f.value(z) - ref.f <= 48.0 * f.l3 * std::pow(R0, 4) / std::pow(N, 5));
    CHECK(f.value(z) <= f.value(z0));
  }
}

TEST_CASE("accelerated tensor method at the minimizer") {
  auto f = quartic_oracle(1.0);
  HyperfastStats st;
  Vec z = basic_hyperfast(f, Vec::Zero(2), 5, {}, &st);
  CHECK(z.norm() == 0.0);
  CHECK_THROWS_AS(basic_hyperfast(f, Vec::Zero(2), 0), InputError);
}

TEST_CASE("restart step counts") {
  // (8 * 48 * 1 * 1 / 0.384)^(1/5) = 1000^(1/5) = 3.98
  CHECK(strong_restart_steps(48.0, 1.0, 1.0, 0.384) == 4);
  CHECK(strong_restart_steps(48.0, 1e-12, 1.0, 1.0) == 1);
  RestartScheduleUniform u;
  u.q = 4.0;
  u.sigma_q = 1.0;
  u.c_hat = 1.0;
  // 2 * l3 * 4 = 8 l3, no Delta dependence at q = 4.
  CHECK(uniform_restart_steps(u, 4.0, 1e-3) == 2);
  CHECK(uniform_restart_steps(u, 4.0, 1e3) == 2);
}

TEST_CASE("strong restarts certify at every stage") {
  auto p = small_logistic();
  auto f = logistic_oracle(p);
  auto ref = reference_solve(p);
  double mu = smoothness_constants(p).mu_strong;
  RestartScheduleStrong s;
  s.R0 = 2.0 * ref.x.norm() + 1.0;
  s.mu = mu;
  auto res = restart_strongly_convex(f, Vec::Zero(3), s, 1e-10);
  REQUIRE(res.restarts >= 1);
  double R = 0.5 * s.R0;
  for (const auto& e : res.log) {
    CHECK(e.certified == doctest::Approx(2.0 * mu * R * R * std::pow(2.0, -2 * e.t)));
    CHECK(e.value - ref.f <= e.certified);
    CHECK(e.steps_planned == strong_restart_steps(48.0, f.l3, e.radius, mu));
    CHECK(e.steps_taken <= e.steps_planned);
  }
  CHECK(f.value(res.z) - ref.f <= 1e-10);
}

TEST_CASE("no restarts when the target already holds") {
  auto f = quartic_oracle(1.0);
  RestartScheduleStrong s;
  s.R0 = 1.0;
  s.mu = 1.0;
  Vec z0 = Vec::Ones(2);
  auto res = restart_strongly_convex(f, z0, s, 1.0);  // 2 * 1 * 0.25 <= 1
  CHECK(res.restarts == 0);
  CHECK(res.z == z0);
  CHECK_THROWS_AS(restart_strongly_convex(f, z0, s, 0.0), InputError);
  s.mu = 0.0;
  CHECK_THROWS_AS(restart_strongly_convex(f, z0, s, 1.0), InputError);
}

TEST_CASE("uniform restarts halve the gap") {
  for (double q : {2.0, 4.0}) {
    // q = 2: x^4/4 + |x|^2/2 with sigma_2 = 1; q = 4: x^4/4 with sigma_4 = 1/3.
    auto f = quartic_oracle(q == 2.0 ? 1.0 : 0.0);
    RestartScheduleUniform s;
    s.q = q;
    s.sigma_q = q == 2.0 ? 1.0 : 1.0 / 3.0;
    Vec z0 = Vec::Ones(2);
    s.Delta0 = f.value(z0);
    auto res = restart_uniformly_convex(f, s, z0, 1e-6);
    REQUIRE(res.restarts >= 1);
    for (const auto& e : res.log) {
      CHECK(e.certified == doctest::Approx(0.5 * e.radius).epsilon(1e-15));
      CHECK(e.value <= e.certified);
    }
    CHECK(res.log.back().certified <= 1e-6);
  }
  RestartScheduleUniform bad;
  bad.q = 5.0;
  CHECK_THROWS_AS(restart_uniformly_convex(quartic_oracle(0.0), bad, Vec::Ones(1), 1e-3),
                  InputError);
}

TEST_CASE("subproblem tolerance") {
  // mu R_phi^4 / (2 k^2 (2 L R + 3 theta)^2 (1 + A mu_rel)) with 2LR + 3theta = 5.
  CHECK(delta_tolerance(1, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.5) == doctest::Approx(0.02));
  CHECK(delta_tolerance(1, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.5) == doctest::Approx(0.01));
  double a = delta_tolerance(3, 0.1, 2.0, 4.0, 1.5, 0.7, 10.0, 0.3);
  double b = delta_tolerance(6, 0.1, 2.0, 4.0, 1.5, 0.7, 10.0, 0.3);
  CHECK(b == doctest::Approx(a / 4.0));
  double prev = 1e300;
  for (double theta : {0.0, 0.5, 1.0, 10.0}) {
    double v = delta_tolerance(2, 0.1, 2.0, 4.0, 1.5, theta, 1.0, 0.3);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(delta_tolerance(0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.5), InputError);
  CHECK_THROWS_AS(delta_tolerance(1, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.5), InputError);
}
