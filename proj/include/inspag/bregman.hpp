#pragma once

#include <cstdint>

#include "inspag/logreg.hpp"

namespace inspag {

// phi(x) = local_problem(x) + (sigma/2)||x||^2, built on the central node's
// n samples.
class Preconditioner {
 public:
  Preconditioner() = default;
  Preconditioner(LogRegProblem local_problem, double sigma);

  const LogRegProblem& local_problem() const { return local_; }
  double sigma() const { return sigma_; }
  Index n() const { return local_.data().size(); }
  Index dim() const { return local_.dim(); }

  double l_phi() const { return l_phi_; }
  double mu_phi() const { return mu_phi_; }
  double kappa_phi() const { return l_phi_ / mu_phi_; }
  double l3_phi() const { return l3_phi_; }

 private:
  LogRegProblem local_;
  double sigma_ = 0.0;
  double l_phi_ = 0.0;
  double mu_phi_ = 0.0;
  double l3_phi_ = 0.0;
};

double phi_value(const Preconditioner& p, const Vec& x);
Vec phi_gradient(const Preconditioner& p, const Vec& x);
double phi_value_and_gradient(const Preconditioner& p, const Vec& x, Vec& grad);
Vec phi_hessian_vec(const Preconditioner& p, const Vec& x, const Vec& v);
Mat phi_hessian_dense(const Preconditioner& p, const Vec& x);
Vec phi_third_bilinear(const Preconditioner& p, const Vec& x, const Vec& h);

// D_phi[u](x) = phi(x) - phi(u) - <grad phi(u), x - u>.
double bregman_div(const Preconditioner& p, const Vec& u, const Vec& x);

struct RelativeConstants {
  double l_rel = 1.0;
  double mu_rel = 1.0;
  double kappa_rel = 1.0;
};

RelativeConstants relative_constants(double mu_F, double sigma);

struct TriangleScalingReport {
  double max_ratio = 0.0;
  int evaluated = 0;
  int skipped = 0;
  bool passed = false;
};

// Samples x - y = tau (u_plus - u) and reports the largest
// D[y](x) / (tau^2 D[u](u_plus)).
TriangleScalingReport triangle_scaling_check(const Preconditioner& p, double G,
                                             int samples, std::uint64_t seed);

}  // namespace inspag
