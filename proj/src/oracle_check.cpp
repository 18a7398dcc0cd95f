#include "inspag/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "inspag/error.hpp"

namespace inspag {

namespace {

double rel_err(const Vec& analytic, const Vec& fd) {
  return (analytic - fd).norm() / std::max(fd.norm(), 1e-8);
}

}  // namespace

OracleErrors fd_oracle_errors(const SmoothOracle& f, Index dim, int points,
                              std::uint64_t seed, double scale) {
  if (dim < 1) throw InputError("oracle check needs dim >= 1");
  if (points < 1) throw InputError("oracle check needs at least one point");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](double s) {
    Vec v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = s * gauss(rng);
    return v;
  };
  OracleErrors e;
  for (int p = 0; p < points; ++p) {
    Vec x = draw(scale);
    Vec v = draw(1.0);
    v.normalize();

    const double hg = 1e-5;
    Vec fd_g(dim);
    for (Index i = 0; i < dim; ++i) {
      Vec xp = x, xm = x;
      double h = hg * std::max(1.0, std::abs(x[i]));
      xp[i] += h;
      xm[i] -= h;
      fd_g[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
    }
    e.gradient = std::max(e.gradient, rel_err(f.grad(x), fd_g));

    const double hh = 1e-5;
    Vec fd_hv = (f.grad(x + hh * v) - f.grad(x - hh * v)) / (2.0 * hh);
    e.hvp = std::max(e.hvp, rel_err(f.hvp(x, v), fd_hv));

    const double ht = 1e-4;
    Vec fd_t = (f.hvp(x + ht * v, v) - f.hvp(x - ht * v, v)) / (2.0 * ht);
    e.third = std::max(e.third, rel_err(f.d3_bilinear(x, v), fd_t));
    ++e.points;
  }
  return e;
}

std::vector<std::string> oracle_failures(const OracleErrors& e,
                                         const OracleTolerances& tol) {
  std::vector<std::string> out;
  if (!(e.gradient <= tol.gradient)) out.push_back("gradient");
  if (!(e.hvp <= tol.hvp)) out.push_back("hessian_vec");
  if (!(e.third <= tol.third)) out.push_back("third_bilinear");
  return out;
}

}  // namespace inspag
