#include "inspag/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

namespace {

// Root of ||s(r)|| = r on (0, r_hi], where ||s(r)|| is nonincreasing in r.
template <class NormAt>
double solve_radius(NormAt norm_at, double c_norm, double L_reg) {
  double tau_hi = std::cbrt(L_reg * c_norm * c_norm);
  double r_hi = std::sqrt(tau_hi / L_reg);
  auto f = [&](double r) { return norm_at(r) - r; };
  double f_hi = f(r_hi);
  if (f_hi >= 0.0) return r_hi;
  double r_lo = 0.0;
  double f_lo = f(r_lo);
  if (!std::isfinite(f_lo)) {
    r_lo = r_hi * 1e-30;
    f_lo = f(r_lo);
    while (!(f_lo > 0.0) || !std::isfinite(f_lo)) {
      if (f_lo <= 0.0) {
        r_lo *= 1e-30;
        if (r_lo < 1e-300) return r_lo;
      } else {
        r_lo *= 10.0;
      }
      f_lo = f(r_lo);
    }
  }
  if (f_lo <= 0.0) return r_lo;
  boost::uintmax_t iters = 200;
  auto bracket = boost::math::tools::toms748_solve(
      f, r_lo, r_hi, f_lo, f_hi,
      boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3),
      iters);
  return 0.5 * (bracket.first + bracket.second);
}

// Conjugate gradients for (H + shift I) x = b.
Vec cg_solve(const LinearOperator& H, double shift, const Vec& b, Vec x0) {
  Vec x = std::move(x0);
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  Vec r = b - H(x) - shift * x;
  Vec p = r;
  double rr = r.squaredNorm();
  const double stop = std::pow(1e-15 * b.norm(), 2);
  const int cap = 10 * static_cast<int>(b.size()) + 100;
  for (int it = 0; it < cap && rr > stop; ++it) {
    Vec hp = H(p) + shift * p;
    double php = p.dot(hp);
    if (!(php > 0.0)) break;
    double a = rr / php;
    x += a * p;
    r -= a * hp;
    double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

void check_tolerance(double residual, double c_norm, double tol) {
  if (!(residual <= tol * std::max(1.0, c_norm)))
    throw ConvergenceError(
        fmt::format("quartic subproblem residual {:.3e} above tolerance", residual),
        residual);
}

}  // namespace

double quartic_residual(const Vec& c, const LinearOperator& H, double L_reg,
                        const Vec& s) {
  return (c + H(s) + L_reg * s.squaredNorm() * s).norm();
}

Vec quartic_subproblem(const Vec& c, const LinearOperator& H, double L_reg,
                       double tol) {
  if (!(L_reg >= 0.0)) throw InputError("quartic subproblem needs L >= 0");
  const double c_norm = c.norm();
  if (c_norm == 0.0) return Vec::Zero(c.size());
  Vec s;
  if (L_reg == 0.0) {
    s = cg_solve(H, 0.0, -c, Vec());
  } else {
    Vec warm;
    auto norm_at = [&](double r) {
      warm = cg_solve(H, L_reg * r * r, -c, warm);
      return warm.norm();
    };
    double r = solve_radius(norm_at, c_norm, L_reg);
    s = cg_solve(H, L_reg * r * r, -c, warm);
  }
  check_tolerance(quartic_residual(c, H, L_reg, s), c_norm, tol);
  return s;
}

DenseQuartic::DenseQuartic(const Mat& H) : H_(0.5 * (H + H.transpose())) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(H_);
  if (eig.info() != Eigen::Success) throw InputError("eigendecomposition failed");
  Q_ = eig.eigenvectors();
  evals_ = eig.eigenvalues().cwiseMax(0.0);
}

Vec DenseQuartic::solve(const Vec& c, double L_reg, double tol) const {
  if (!(L_reg >= 0.0)) throw InputError("quartic subproblem needs L >= 0");
  if (c.size() != H_.rows()) throw InputError("quartic subproblem: dimension mismatch");
  const double c_norm = c.norm();
  if (c_norm == 0.0) return Vec::Zero(c.size());
  Vec ch = Q_.transpose() * c;
  auto coeffs = [&](double tau) { return (ch.array() / (evals_.array() + tau)).matrix(); };
  double tau = 0.0;
  if (L_reg > 0.0) {
    auto norm_at = [&](double r) { return coeffs(L_reg * r * r).norm(); };
    double r = solve_radius(norm_at, c_norm, L_reg);
    tau = L_reg * r * r;
  }
  Vec s = -(Q_ * coeffs(tau));
  double residual = (c + H_ * s + L_reg * s.squaredNorm() * s).norm();
  check_tolerance(residual, c_norm, tol);
  return s;
}

}  // namespace inspag
