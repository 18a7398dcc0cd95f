#include <doctest.h>

#include <random>

#include "inspag/bregman.hpp"
#include "inspag/error.hpp"
#include "test_support.hpp"

using namespace inspag;

namespace {

Preconditioner empty_precond(Index d, double sigma) {
  return Preconditioner(LogRegProblem(make_dataset(d, {}, {}), 0.0, 0.0), sigma);
}

}  // namespace

TEST_CASE("pure ridge reference gives half the squared distance") {
  auto p = empty_precond(2, 1.0);
  Vec u = Vec::Zero(2), x(2);
  x << 3.0, 4.0;
  CHECK(bregman_div(p, u, x) == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(bregman_div(p, x, x) == 0.0);
  CHECK(p.l_phi() == 1.0);
  CHECK(p.mu_phi() == 1.0);
  CHECK(p.l3_phi() == 0.0);
}

TEST_CASE("sigma zero reduces to the loss divergence") {
  std::mt19937_64 rng(2);
  auto data = testsupport::random_dataset(rng, 30, 4);
  LogRegProblem local(data, 1e-2, 1e-3, sparse_feature_mask(data, 0.5));
  Preconditioner p(local, 0.0);
  for (int rep = 0; rep < 10; ++rep) {
    Vec u = testsupport::gaussian_vec(rng, 4), x = testsupport::gaussian_vec(rng, 4);
    double direct = loss_value(local, x) - loss_value(local, u) - gradient(local, u).dot(x - u);
    CHECK(bregman_div(p, u, x) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("ridge adds sigma/2 squared distance") {
  std::mt19937_64 rng(4);
  auto data = testsupport::random_dataset(rng, 20, 3);
  LogRegProblem local(data, 1e-3, 1e-3);
  Preconditioner p0(local, 0.0), p1(local, 2.0);
  Vec u(3), x(3);
  u << 1.0, 0.0, 0.0;
  x << 1.0, 3.0, 4.0;
  // ||x - u||^2 = 25, so the ridge part is 2/2 * 25.
  CHECK(bregman_div(p1, u, x) - bregman_div(p0, u, x) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(p1.l_phi() - p0.l_phi() == doctest::Approx(2.0));
  CHECK(p1.mu_phi() == doctest::Approx(2.0 + 1e-3));
}

TEST_CASE("property: divergence sandwich with the reported constants") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    auto data = testsupport::random_dataset(rng, 25, 5);
    Preconditioner p(LogRegProblem(data, 1e-2, 1e-3, sparse_feature_mask(data, 0.5)), 1e-3);
    Vec u = testsupport::gaussian_vec(rng, 5, 2.0), x = testsupport::gaussian_vec(rng, 5, 2.0);
    double d = bregman_div(p, u, x), sq = (x - u).squaredNorm();
    CHECK(d >= 0.5 * p.mu_phi() * sq * (1.0 - 1e-10));
    CHECK(d <= 0.5 * p.l_phi() * sq * (1.0 + 1e-10));
    CHECK(p.kappa_phi() == doctest::Approx(p.l_phi() / p.mu_phi()));
  }
}

TEST_CASE("relative constants") {
  auto a = relative_constants(1.0, 0.0);
  CHECK(a.mu_rel == 1.0);
  CHECK(a.l_rel == 1.0);
  CHECK(a.kappa_rel == 1.0);
  auto b = relative_constants(0.1, 0.2);
  CHECK(b.mu_rel == doctest::Approx(0.2));
  auto c = relative_constants(1e-3, 1e-3);
  CHECK(c.mu_rel == doctest::Approx(1.0 / 3.0));
  CHECK(c.kappa_rel == doctest::Approx(3.0));
  for (double mu : {1e-4, 0.3, 5.0})
    for (double s : {0.0, 1e-3, 2.0}) {
      auto r = relative_constants(mu, s);
      CHECK(r.kappa_rel * r.mu_rel == doctest::Approx(1.0).epsilon(1e-14));
    }
  CHECK_THROWS_AS(relative_constants(0.0, 1.0), InputError);
  CHECK_THROWS_AS(relative_constants(1.0, -1.0), InputError);
}

TEST_CASE("relative smoothness and strong convexity against the full-data reference") {
  std::mt19937_64 rng(13);
  auto data = testsupport::random_dataset(rng, 40, 4);
  auto mask = sparse_feature_mask(data, 0.5);
  const double lam = 1e-3, sigma = 1e-3;
  LogRegProblem full(data, lam, lam, mask);
  Preconditioner p(full, sigma);
  auto rel = relative_constants(lam, sigma);
  for (int rep = 0; rep < 40; ++rep) {
    Vec u = testsupport::gaussian_vec(rng, 4, 3.0), x = testsupport::gaussian_vec(rng, 4, 3.0);
    double dF = loss_value(full, x) - loss_value(full, u) - gradient(full, u).dot(x - u);
    double dphi = bregman_div(p, u, x);
    CHECK(dF <= rel.l_rel * dphi * (1.0 + 1e-10));
    CHECK(dF >= rel.mu_rel * dphi * (1.0 - 1e-10));
  }
}

TEST_CASE("triangle scaling check") {
  auto q = empty_precond(3, 1.0);
  auto ok = triangle_scaling_check(q, 1.0, 200, 1);
  CHECK(ok.passed);
  CHECK(ok.evaluated == 200);
  CHECK(ok.max_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(triangle_scaling_check(q, 0.5, 50, 1).passed);

  std::mt19937_64 rng(21);
  auto data = testsupport::random_dataset(rng, 30, 3);
  Preconditioner p(LogRegProblem(data, 1e-2, 1e-2), 1e-2);
  auto rep = triangle_scaling_check(p, p.kappa_phi(), 300, 9);
  CHECK(rep.passed);
  CHECK(rep.max_ratio <= p.kappa_phi());
  CHECK_THROWS_AS(triangle_scaling_check(p, 0.0, 1, 1), InputError);
}

TEST_CASE("divergence rejects wrong lengths") {
  auto p = empty_precond(2, 1.0);
  CHECK_THROWS_AS(bregman_div(p, Vec::Zero(3), Vec::Zero(2)), InputError);
  CHECK_THROWS_AS(Preconditioner(LogRegProblem(make_dataset(1, {}, {}), 0.0, 0.0), -1.0),
                  InputError);
}
