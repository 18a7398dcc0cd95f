#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inspag/hyperfast.hpp"

namespace inspag {

struct OracleErrors {
  double gradient = 0.0;  // vs central differences of the value
  double hvp = 0.0;       // vs central differences of the gradient
  double third = 0.0;     // vs central differences of the Hessian-vector product
  int points = 0;
};

struct OracleTolerances {
  double gradient = 1e-6;
  double hvp = 1e-5;
  double third = 1e-4;
};

// Largest relative error ||analytic - fd|| / max(||fd||, floor) over `points`
// random x ~ N(0, scale^2 I) and random unit directions.
OracleErrors fd_oracle_errors(const SmoothOracle& f, Index dim, int points,
                              std::uint64_t seed, double scale = 1.0);

// Names of the oracles above tolerance, empty when all pass.
std::vector<std::string> oracle_failures(const OracleErrors& e,
                                         const OracleTolerances& tol = {});

}  // namespace inspag
