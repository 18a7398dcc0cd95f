#include <doctest.h>

#include <random>

#include "inspag/error.hpp"
#include "inspag/quartic.hpp"
#include "test_support.hpp"

using namespace inspag;

namespace {

LinearOperator as_op(const Mat& H) {
  return [H](const Vec& v) -> Vec { return H * v; };
}

Mat random_psd(std::mt19937_64& rng, Index d, Index rank) {
  Mat B(d, rank);
  for (Index j = 0; j < rank; ++j) B.col(j) = testsupport::gaussian_vec(rng, d);
  return B * B.transpose();
}

}  // namespace

TEST_CASE("zero linear term gives zero step") {
  Mat H = Mat::Identity(3, 3);
  CHECK(quartic_subproblem(Vec::Zero(3), as_op(H), 1.0, 1e-12).norm() == 0.0);
  CHECK(DenseQuartic(H).solve(Vec::Zero(3), 1.0, 1e-12).norm() == 0.0);
}

TEST_CASE("no quartic term reduces to a linear solve") {
  Mat H = Mat::Identity(2, 2);
  Vec c(2);
  c << -1.0, 0.0;
  Vec s = quartic_subproblem(c, as_op(H), 0.0, 1e-12);
  CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s[1]) <= 1e-12);
  Vec t = DenseQuartic(H).solve(c, 0.0, 1e-12);
  CHECK((t - s).norm() <= 1e-12);
}

TEST_CASE("scalar case solves t^3 + t = 1") {
  Mat H = Mat::Identity(1, 1);
  Vec c = -Vec::Ones(1);
  const double root = 0.682327803828019;
  CHECK(quartic_subproblem(c, as_op(H), 1.0, 1e-13)[0] == doctest::Approx(root).epsilon(1e-12));
  CHECK(DenseQuartic(H).solve(c, 1.0, 1e-13)[0] == doctest::Approx(root).epsilon(1e-12));
}

TEST_CASE("pure quartic with singular H") {
  // H = 0: L ||s||^2 s = -c, so ||s||^3 = ||c|| / L.
  Mat H = Mat::Zero(3, 3);
  Vec c(3);
  c << 0.0, 8.0, 0.0;
  Vec s = DenseQuartic(H).solve(c, 1.0, 1e-12);
  CHECK(s[1] == doctest::Approx(-2.0).epsilon(1e-12));
  Vec s2 = quartic_subproblem(c, as_op(H), 1.0, 1e-12);
  CHECK(s2[1] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("property: residual contract on random instances") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lg(-3.0, 3.0);
  for (int rep = 0; rep < 60; ++rep) {
    Index d = 1 + static_cast<Index>(rng() % 12);
    Index rank = static_cast<Index>(rng() % static_cast<std::uint64_t>(d + 1));
    Mat H = random_psd(rng, d, rank);
    Vec c = testsupport::gaussian_vec(rng, d, std::pow(10.0, lg(rng)));
    double L = std::pow(10.0, lg(rng));
    const double tol = 1e-10;
    Vec a = quartic_subproblem(c, as_op(H), L, tol);
    Vec b = DenseQuartic(H).solve(c, L, tol);
    double bound = tol * std::max(1.0, c.norm());
    CHECK(quartic_residual(c, as_op(H), L, a) <= bound);
    CHECK(quartic_residual(c, as_op(H), L, b) <= bound);
    // Strictly convex objective: both paths find the same minimizer.
    CHECK((a - b).norm() <= 1e-6 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("quartic input validation") {
  Mat H = Mat::Identity(2, 2);
  CHECK_THROWS_AS(quartic_subproblem(Vec::Ones(2), as_op(H), -1.0, 1e-10), InputError);
  CHECK_THROWS_AS(DenseQuartic(H).solve(Vec::Ones(3), 1.0, 1e-10), InputError);
}
