#include "inspag/agm_models.hpp"

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "inspag/error.hpp"

namespace inspag {

GradientModel::GradientModel(ValueFn f, GradFn grad, Mat P, double mu)
    : f_(std::move(f)), grad_(std::move(grad)), P_(std::move(P)), mu_(mu) {
  if (P_.rows() != P_.cols()) throw InputError("reference matrix must be square");
  P_ldlt_.compute(P_);
  if (P_ldlt_.info() != Eigen::Success || !P_ldlt_.isPositive())
    throw InputError("reference matrix must be positive definite");
  if (!(mu >= 0.0)) throw InputError("model mu must be nonnegative");
}

void GradientModel::set_inexactness(Vec bias, double value_shift) {
  if (bias.size() != 0 && bias.size() != P_.rows())
    throw InputError("gradient bias has wrong length");
  bias_ = std::move(bias);
  shift_ = value_shift;
}

Vec GradientModel::model_grad(const Vec& y) const {
  Vec g = grad_(y);
  if (bias_.size() != 0) g += bias_;
  return g;
}

double GradientModel::f_delta(const Vec& y) const { return f_(y) - shift_; }

double GradientModel::psi_delta(const Vec& x, const Vec& y) const {
  return model_grad(y).dot(x - y);
}

double GradientModel::bregman(const Vec& u, const Vec& x) const {
  Vec d = x - u;
  return 0.5 * d.dot(P_ * d);
}

Vec GradientModel::project(const ProjectionTask& task, double) const {
  // alpha g + w_u P (x - u) + w_y P (x - y) = 0
  double w = task.weight_u + task.weight_y;
  Vec rhs = task.weight_u * task.prox_center + task.weight_y * task.anchor;
  return (rhs - task.alpha * P_ldlt_.solve(model_grad(task.anchor))) / w;
}

double GradientModel::projection_residual(const ProjectionTask& task,
                                          const Vec& x) const {
  Vec r = task.alpha * model_grad(task.anchor) +
          task.weight_u * (P_ * (x - task.prox_center)) +
          task.weight_y * (P_ * (x - task.anchor));
  return r.norm();
}

QuadraticObjective random_quadratic(Index d, double mu, double L, std::uint64_t seed) {
  if (d < 1) throw InputError("random_quadratic needs d >= 1");
  if (!(mu > 0.0) || !(L >= mu)) throw InputError("random_quadratic needs 0 < mu <= L");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat G(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) G(i, j) = gauss(rng);
  Mat V = Eigen::HouseholderQR<Mat>(G).householderQ();
  Vec lam(d);
  for (Index i = 0; i < d; ++i) {
    double t = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    lam[i] = mu * std::pow(L / mu, t);
  }
  QuadraticObjective q;
  q.Q = V * lam.asDiagonal() * V.transpose();
  q.Q = 0.5 * (q.Q + q.Q.transpose());
  q.b = Vec(d);
  for (Index i = 0; i < d; ++i) q.b[i] = gauss(rng);
  return q;
}

}  // namespace inspag
