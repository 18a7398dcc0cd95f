#include "inspag/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "inspag/error.hpp"

namespace inspag {

Preconditioner::Preconditioner(LogRegProblem local_problem, double sigma)
    : local_(std::move(local_problem)), sigma_(sigma) {
  if (!(sigma >= 0.0)) throw InputError("ridge sigma must be nonnegative");
  double lmax = std::max(local_.lambda_sparse(), local_.lambda_dense());
  double lmin = std::min(local_.lambda_sparse(), local_.lambda_dense());
  if (local_.data().size() > 0) {
    SmoothnessConstants c = smoothness_constants(local_);
    l_phi_ = c.l_smooth + sigma_;
    l3_phi_ = c.l3;
  } else {
    l_phi_ = lmax + sigma_;
    l3_phi_ = 0.0;
  }
  mu_phi_ = lmin + sigma_;
}

double phi_value(const Preconditioner& p, const Vec& x) {
  return loss_value(p.local_problem(), x) + 0.5 * p.sigma() * x.squaredNorm();
}

Vec phi_gradient(const Preconditioner& p, const Vec& x) {
  Vec g;
  phi_value_and_gradient(p, x, g);
  return g;
}

double phi_value_and_gradient(const Preconditioner& p, const Vec& x, Vec& grad) {
  double v = value_and_gradient(p.local_problem(), x, grad);
  grad += p.sigma() * x;
  return v + 0.5 * p.sigma() * x.squaredNorm();
}

Vec phi_hessian_vec(const Preconditioner& p, const Vec& x, const Vec& v) {
  return hessian_vec(p.local_problem(), x, v) + p.sigma() * v;
}

Mat phi_hessian_dense(const Preconditioner& p, const Vec& x) {
  Mat h = hessian_dense(p.local_problem(), x);
  h.diagonal().array() += p.sigma();
  return h;
}

Vec phi_third_bilinear(const Preconditioner& p, const Vec& x, const Vec& h) {
  return third_deriv_bilinear(p.local_problem(), x, h);
}

double bregman_div(const Preconditioner& p, const Vec& u, const Vec& x) {
  if (u.size() != p.dim() || x.size() != p.dim())
    throw InputError("bregman_div: dimension mismatch");
  Vec gu;
  double fu = phi_value_and_gradient(p, u, gu);
  return phi_value(p, x) - fu - gu.dot(x - u);
}

RelativeConstants relative_constants(double mu_F, double sigma) {
  if (!(mu_F > 0.0)) throw InputError("relative constants need mu_F > 0");
  if (!(sigma >= 0.0)) throw InputError("relative constants need sigma >= 0");
  RelativeConstants r;
  r.l_rel = 1.0;
  r.mu_rel = mu_F / (mu_F + 2.0 * sigma);
  r.kappa_rel = 1.0 + 2.0 * sigma / mu_F;
  return r;
}

TriangleScalingReport triangle_scaling_check(const Preconditioner& p, double G,
                                             int samples, std::uint64_t seed) {
  if (!(G > 0.0)) throw InputError("G must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&] {
    Vec v(p.dim());
    for (Index j = 0; j < v.size(); ++j) v[j] = gauss(rng);
    return v;
  };
  TriangleScalingReport rep;
  for (int s = 0; s < samples; ++s) {
    Vec u = draw(), u_plus = draw(), y = draw();
    double tau = unif(rng);
    Vec x = y + tau * (u_plus - u);
    double base = tau * tau * bregman_div(p, u, u_plus);
    if (!(base > 0.0)) {
      ++rep.skipped;
      continue;
    }
    rep.max_ratio = std::max(rep.max_ratio, bregman_div(p, y, x) / base);
    ++rep.evaluated;
  }
  // Relative slack for rounding in the divergence differences.
  rep.passed = rep.evaluated > 0 && rep.max_ratio <= G * (1.0 + 1e-9);
  return rep;
}

}  // namespace inspag
