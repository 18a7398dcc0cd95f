#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Cholesky>

#include "inspag/agm.hpp"

namespace inspag {

// Gradient-type model psi(x, y) = <grad f(y) + bias, x - y> with the
// quadratic reference phi(x) = (1/2) x^T P x, so projections are exact.
// value_shift lowers f_delta by a constant; together with a bias this gives
// a delta-model with delta > 0.
class GradientModel : public ModelOracle {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  GradientModel(ValueFn f, GradFn grad, Mat P, double mu);

  void set_inexactness(Vec bias, double value_shift);

  double f_delta(const Vec& y) const override;
  double psi_delta(const Vec& x, const Vec& y) const override;
  double bregman(const Vec& u, const Vec& x) const override;
  Vec project(const ProjectionTask& task, double delta_tilde) const override;
  double mu() const override { return mu_; }

  double f(const Vec& x) const { return f_(x); }
  Vec grad(const Vec& x) const { return grad_(x); }
  // Norm of grad Phi at x; zero certifies an exact projection.
  double projection_residual(const ProjectionTask& task, const Vec& x) const;

 private:
  Vec model_grad(const Vec& y) const;

  ValueFn f_;
  GradFn grad_;
  Mat P_;
  Eigen::LDLT<Mat> P_ldlt_;
  double mu_;
  Vec bias_;
  double shift_ = 0.0;
};

// f(x) = (1/2) x^T Q x - b^T x with closed-form minimizer.
struct QuadraticObjective {
  Mat Q;
  Vec b;

  double value(const Vec& x) const { return 0.5 * x.dot(Q * x) - b.dot(x); }
  Vec grad(const Vec& x) const { return Q * x - b; }
  Vec minimizer() const { return Q.ldlt().solve(b); }
  double min_value() const { return value(minimizer()); }
};

// Q = V diag(lambda) V^T with lambda log-spaced over [mu, L] and V a random
// orthogonal matrix; b ~ N(0, I).
QuadraticObjective random_quadratic(Index d, double mu, double L, std::uint64_t seed);

}  // namespace inspag
