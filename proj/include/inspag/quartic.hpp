#pragma once

#include <functional>

#include <Eigen/Eigenvalues>

#include "inspag/sparse_dataset.hpp"

namespace inspag {

using LinearOperator = std::function<Vec(const Vec&)>;

// min_s <c, s> + (1/2)<H s, s> + (L/4)||s||^4 for symmetric PSD H.
// Stationarity is (H + L r^2 I) s = -c with r = ||s||, so the solve reduces
// to a scalar equation in r.

// ||c + H s + L ||s||^2 s||
double quartic_residual(const Vec& c, const LinearOperator& H, double L_reg,
                        const Vec& s);

// Matrix-free: conjugate gradients on the shifted systems. Throws
// ConvergenceError carrying the residual when
// residual > tol * max(1, ||c||).
Vec quartic_subproblem(const Vec& c, const LinearOperator& H, double L_reg,
                       double tol);

// Same problem with H factored once; each solve is O(d^2).
class DenseQuartic {
 public:
  explicit DenseQuartic(const Mat& H);

  Vec solve(const Vec& c, double L_reg, double tol) const;
  const Mat& matrix() const { return H_; }

 private:
  Mat H_;
  Mat Q_;
  Vec evals_;
};

}  // namespace inspag
