#include "inspag/reference.hpp"

#include <Eigen/Cholesky>

namespace inspag {

ReferenceSolution reference_solve(const SmoothOracle& f, const Vec& x0,
                                  double grad_tol, int max_iters) {
  ReferenceSolution out;
  out.x = x0;
  out.f = f.value(x0);
  Vec g = f.grad(x0);
  out.grad_norm = g.norm();
  int stalled = 0;
  for (; out.iters < max_iters && out.grad_norm > grad_tol && stalled < 3; ++out.iters) {
    Eigen::LDLT<Mat> ldlt(dense_hessian(f, out.x));
    Vec step = ldlt.solve(-g);
    double slope = g.dot(step);
    if (!(slope < 0.0)) step = -g, slope = -g.squaredNorm();
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Vec x_new = out.x + t * step;
      double f_new = f.value(x_new);
      Vec g_new = f.grad(x_new);
      // Near the optimum value differences drown in rounding; accept on the
      // gradient instead.
      if (f_new <= out.f + 1e-4 * t * slope || g_new.norm() < 0.5 * out.grad_norm) {
        stalled = g_new.norm() < out.grad_norm ? 0 : stalled + 1;
        if (g_new.norm() <= out.grad_norm || f_new < out.f) {
          out.x = std::move(x_new);
          out.f = f_new;
          g = std::move(g_new);
          out.grad_norm = g.norm();
        }
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return out;
}

ReferenceSolution reference_solve(const LogRegProblem& p, double grad_tol,
                                  int max_iters) {
  return reference_solve(logistic_oracle(p), Vec::Zero(p.dim()), grad_tol, max_iters);
}

}  // namespace inspag
