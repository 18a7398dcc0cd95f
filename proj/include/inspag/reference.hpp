#pragma once

#include "inspag/hyperfast.hpp"
#include "inspag/logreg.hpp"

namespace inspag {

struct ReferenceSolution {
  Vec x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
};

// Damped Newton with Armijo backtracking; stops at ||grad|| <= grad_tol or
// when steps no longer reduce the gradient.
ReferenceSolution reference_solve(const SmoothOracle& f, const Vec& x0,
                                  double grad_tol = 1e-13, int max_iters = 200);
ReferenceSolution reference_solve(const LogRegProblem& p, double grad_tol = 1e-13,
                                  int max_iters = 200);

}  // namespace inspag
