#include "inspag/hyperfast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

SmoothOracle logistic_oracle(const LogRegProblem& p) {
  SmoothOracle f;
  f.value = [&p](const Vec& x) { return loss_value(p, x); };
  f.grad = [&p](const Vec& x) { return gradient(p, x); };
  f.hvp = [&p](const Vec& x, const Vec& v) { return hessian_vec(p, x, v); };
  f.d3_bilinear = [&p](const Vec& x, const Vec& h) {
    return third_deriv_bilinear(p, x, h);
  };
  f.hessian = [&p](const Vec& x) { return hessian_dense(p, x); };
  f.l3 = smoothness_constants(p).l3;
  return f;
}

Mat dense_hessian(const SmoothOracle& f, const Vec& x) {
  if (f.hessian) return f.hessian(x);
  const Index d = x.size();
  Mat h(d, d);
  for (Index j = 0; j < d; ++j) h.col(j) = f.hvp(x, Vec::Unit(d, j));
  return 0.5 * (h + h.transpose());
}

double tensor_model(const SmoothOracle& f, const Vec& x, double l3_step,
                    const Vec& y) {
  Vec h = y - x;
  double hn2 = h.squaredNorm();
  return f.grad(x).dot(h) + 0.5 * h.dot(f.hvp(x, h)) +
         h.dot(f.d3_bilinear(x, h)) / 6.0 + 0.125 * l3_step * hn2 * hn2;
}

TensorStepResult tensor_step(const SmoothOracle& f, const Vec& x,
                             double l3_step, const TensorStepConfig& cfg) {
  if (!(l3_step > 0.0)) throw InputError("tensor step needs l3_step > 0");
  TensorStepResult res;
  res.y = x;
  const Vec g = f.grad(x);
  const double gn = g.norm();
  if (gn == 0.0) {
    res.converged = true;
    return res;
  }
  const double L = l3_step;
  const double L_rel = 1.0 + 1.0 / std::sqrt(2.0);
  const Index d = x.size();

  std::optional<DenseQuartic> dense;
  LinearOperator H;
  if (f.hessian || d <= cfg.dense_max_dim) {
    dense.emplace(dense_hessian(f, x));
    H = [&dense](const Vec& v) { return Vec(dense->matrix() * v); };
  } else {
    H = [&f, &x](const Vec& v) { return f.hvp(x, v); };
  }
  auto quartic = [&](const Vec& c, double Lq) {
    return dense ? dense->solve(c, Lq, cfg.quartic_tol)
                 : quartic_subproblem(c, H, Lq, cfg.quartic_tol);
  };

  Vec h = Vec::Zero(d);
  Vec Hh = Vec::Zero(d);
  Vec T = Vec::Zero(d);  // D3[h, h]
  double omega = 0.0;
  double best_gn = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0;; ++it) {
    const double hn2 = h.squaredNorm();
    Vec grad_a = Hh + 0.5 * L * hn2 * h;
    Vec grad_om = g + grad_a + 0.5 * T;
    res.model_grad_norm = grad_om.norm();
    if (res.model_grad_norm <= cfg.tol * gn) {
      res.converged = true;
      break;
    }
    if (res.model_grad_norm < best_gn) {
      best_gn = res.model_grad_norm;
      since_best = 0;
    } else if (++since_best > 50) {
      break;
    }
    if (it >= cfg.max_iters) break;

    Vec target = grad_a - grad_om / L_rel;
    Vec h_new = quartic(-target, 0.5 * L);
    Vec Hh_new = H(h_new);
    Vec T_new = f.d3_bilinear(x, h_new);
    double n2 = h_new.squaredNorm();
    double om_new = g.dot(h_new) + 0.5 * h_new.dot(Hh_new) +
                    h_new.dot(T_new) / 6.0 + 0.125 * L * n2 * n2;
    if (!std::isfinite(om_new) ||
        om_new > omega + 1e-12 * std::abs(omega) + 1e-300) {
      res.monotone = false;
      break;
    }
    h = std::move(h_new);
    Hh = std::move(Hh_new);
    T = std::move(T_new);
    omega = om_new;
    res.iters = it + 1;
  }
  res.y = x + h;
  res.model_value = omega;
  return res;
}

namespace {

struct SearchedStep {
  TensorStepResult step;
  double f_y = 0.0;
};

// Tensor step whose regularization doubles until the model upper bound
// f(y) <= f(x) + Omega(y) holds.
SearchedStep searched_step(const SmoothOracle& f, const Vec& x, double f_x,
                           double& l3, const HyperfastConfig& cfg,
                           HyperfastStats& stats) {
  for (int trial = 0; trial < cfg.line_search_cap; ++trial) {
    TensorStepResult r = tensor_step(f, x, l3, cfg.step);
    ++stats.tensor_steps;
    stats.inner_iters += r.iters;
    if (r.monotone) {
      double f_y = f.value(r.y);
      double slack = 1e-12 * (std::abs(f_x) + std::abs(f_y));
      if (f_y <= f_x + r.model_value + slack) return {std::move(r), f_y};
    }
    l3 *= 2.0;
  }
  throw ConvergenceError(
      fmt::format("l3 line search exceeded {} trials", cfg.line_search_cap), l3);
}

// Error tolerance of the proximal-point view: ||y - x~ + lambda grad f(y)||
// <= kHpeSigma ||y - x~||.
constexpr double kHpeSigma = 0.9;

}  // namespace

Vec basic_hyperfast(const SmoothOracle& f, const Vec& z0, int N,
                    const HyperfastConfig& cfg, HyperfastStats* stats_out) {
  if (N < 1) throw InputError("basic_hyperfast needs N >= 1");
  if (!(f.l3 > 0.0)) throw InputError("basic_hyperfast needs oracle l3 > 0");
  HyperfastStats stats;
  const double l3_floor = cfg.l3_floor_ratio * f.l3;
  double l3 = cfg.l3_init > 0.0 ? std::max(cfg.l3_init, l3_floor) : f.l3;

  Vec x = z0;  // gradient-step sequence
  Vec y = z0;  // tensor-step sequence
  double A = 0.0;
  Vec g_y = f.grad(y);
  double f_y = f.value(y);
  Vec best = y;
  double f_best = f_y;
  double lambda = 0.0;

  for (int k = 0; k < N; ++k) {
    if (g_y.norm() <= cfg.grad_tol) break;
    ++stats.steps;
    // Try a smaller regularization first; it stays fixed across the lambda
    // search unless a check forces it up.
    double L = std::max(0.5 * l3, l3_floor);
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double a = 0.0, A_next = 0.0;
    Vec x_tilde, g_new;
    SearchedStep chosen;
    bool stationary = false;
    int l3_raises = 0;
    for (int trial = 0; trial < cfg.lambda_search_cap;) {
      const bool free_lambda = (A == 0.0 || lambda == 0.0);
      if (free_lambda) {
        x_tilde = x;
      } else {
        a = 0.5 * (lambda + std::sqrt(lambda * lambda + 4.0 * lambda * A));
        A_next = A + a;
        x_tilde = (A * y + a * x) / A_next;
      }
      const double f_xt = f.value(x_tilde);
      chosen = searched_step(f, x_tilde, f_xt, L, cfg, stats);
      const Vec h = chosen.step.y - x_tilde;
      const double h2 = h.squaredNorm();
      // Below these the step is rounding noise.
      if (std::sqrt(h2) <= 1e-14 * (1.0 + x_tilde.norm()) ||
          f_xt - chosen.f_y <= 1e-15 * std::max(1.0, std::abs(f_xt))) {
        stationary = true;
        break;
      }
      if (free_lambda) {
        lambda = 1.25 / (L * h2);
        a = 0.5 * (lambda + std::sqrt(lambda * lambda + 4.0 * lambda * A));
        A_next = A + a;
      }
      g_new = f.grad(chosen.step.y);
      const double kappa = free_lambda ? 0.625 : 0.5 * lambda * L * h2;
      const bool in_window = kappa >= 0.5 && kappa <= 0.75;
      if (in_window && (h + lambda * g_new).norm() > kHpeSigma * std::sqrt(h2)) {
        // A millionfold gradient drop that still fails the check means the
        // residual gradient is rounding noise at this scale: keep y and stop.
        if (g_new.norm() <= 1e-6 * f.grad(x_tilde).norm() && chosen.f_y <= f_xt) {
          stationary = true;
          break;
        }
        if (++l3_raises > cfg.line_search_cap)
          throw ConvergenceError("tensor step error condition not met", L);
        L *= 2.0;
        lo = 0.0;
        hi = std::numeric_limits<double>::infinity();
        if (free_lambda) lambda = 0.0;
        continue;
      }
      ++trial;
      if (in_window || trial == cfg.lambda_search_cap) break;
      if (kappa < 0.5) {
        lo = lambda;
        lambda = std::isfinite(hi) ? std::sqrt(lo * hi)
                                   : lambda * std::clamp(0.625 / kappa, 2.0, 64.0);
      } else {
        hi = lambda;
        lambda = lo > 0.0 ? std::sqrt(lo * hi)
                          : lambda * std::clamp(0.625 / kappa, 1.0 / 64.0, 0.5);
      }
    }
    l3 = L;
    if (stationary) {
      if (chosen.f_y < f_best && chosen.f_y <= f.value(x_tilde)) {
        best = chosen.step.y;
      } else if (f.value(x_tilde) < f_best) {
        best = x_tilde;
      }
      break;
    }

    y = std::move(chosen.step.y);
    f_y = chosen.f_y;
    g_y = std::move(g_new);
    x -= a * g_y;
    A = A_next;
    if (f_y < f_best) {
      f_best = f_y;
      best = y;
    }
  }
  stats.l3_last = l3;
  if (stats_out) {
    stats_out->steps += stats.steps;
    stats_out->tensor_steps += stats.tensor_steps;
    stats_out->inner_iters += stats.inner_iters;
    stats_out->l3_last = stats.l3_last;
  }
  return best;
}

int strong_restart_steps(double c, double l3, double R_t, double mu) {
  double n = std::ceil(std::pow(8.0 * c * l3 * R_t * R_t / mu, 0.2));
  return std::max(1, static_cast<int>(n));
}

int uniform_restart_steps(const RestartScheduleUniform& s, double l3,
                          double Delta_k) {
  double base = 2.0 * s.c_hat * l3 * std::pow(s.q, 4.0 / s.q) *
                std::pow(s.sigma_q, -4.0 / s.q) *
                std::pow(Delta_k, (4.0 - s.q) / s.q);
  return std::max(1, static_cast<int>(std::ceil(std::pow(base, 0.2))));
}

RestartResult restart_strongly_convex(const SmoothOracle& f, const Vec& z0,
                                      const RestartScheduleStrong& sched,
                                      double target, HyperfastConfig cfg) {
  if (!(sched.R0 > 0.0) || !(sched.mu > 0.0))
    throw InputError("strong restart schedule needs R0 > 0 and mu > 0");
  if (!(target > 0.0)) throw InputError("restart target must be positive");
  RestartResult out;
  out.z = z0;
  const double R = 0.5 * sched.R0;
  auto certified = [&](int t) { return 2.0 * sched.mu * R * R * std::pow(4.0, -t); };
  // Gradient small enough that the strong-convexity gap bound is 1e-3 * target.
  cfg.grad_tol = std::max(cfg.grad_tol, std::sqrt(2.0 * sched.mu * 1e-3 * target));
  int t = 0;
  while (certified(t) > target) {
    if (t >= sched.t_max)
      throw ConvergenceError(
          fmt::format("strong restarts exceeded t_max = {}", sched.t_max),
          certified(t));
    double R_t = sched.R0 * std::pow(2.0, -t);
    int N_t = strong_restart_steps(sched.c, f.l3, R_t, sched.mu);
    long before = out.stats.steps;
    out.z = basic_hyperfast(f, out.z, N_t, cfg, &out.stats);
    cfg.l3_init = out.stats.l3_last;
    ++t;
    out.log.push_back({t, R_t, N_t, out.stats.steps - before, certified(t), f.value(out.z)});
  }
  out.restarts = t;
  out.total_steps = out.stats.steps;
  return out;
}

RestartResult restart_uniformly_convex(const SmoothOracle& f,
                                       const RestartScheduleUniform& sched,
                                       const Vec& z0, double eps,
                                       HyperfastConfig cfg) {
  if (!(sched.q >= 2.0 && sched.q <= 4.0)) throw InputError("q must lie in [2,4]");
  if (!(sched.sigma_q > 0.0) || !(sched.Delta0 > 0.0))
    throw InputError("uniform restart schedule needs sigma_q > 0 and Delta0 > 0");
  if (!(eps > 0.0)) throw InputError("restart target must be positive");
  RestartResult out;
  out.z = z0;
  const double q = sched.q;
  // f - f* <= ((q-1)/q) sigma^{-1/(q-1)} ||g||^{q/(q-1)}; keep it at 1e-3 * eps.
  double g_tol = std::pow(1e-3 * eps * q / (q - 1.0) * std::pow(sched.sigma_q, 1.0 / (q - 1.0)),
                          (q - 1.0) / q);
  cfg.grad_tol = std::max(cfg.grad_tol, g_tol);
  int k = 0;
  auto delta = [&](int i) { return sched.Delta0 * std::pow(2.0, -i); };
  while (delta(k) > eps) {
    if (k >= sched.k_max)
      throw ConvergenceError(
          fmt::format("uniform restarts exceeded k_max = {}", sched.k_max), delta(k));
    int N_k = uniform_restart_steps(sched, f.l3, delta(k));
    long before = out.stats.steps;
    out.z = basic_hyperfast(f, out.z, N_k, cfg, &out.stats);
    cfg.l3_init = out.stats.l3_last;
    ++k;
    out.log.push_back({k, delta(k - 1), N_k, out.stats.steps - before, delta(k), f.value(out.z)});
  }
  out.restarts = k;
  out.total_steps = out.stats.steps;
  return out;
}

double delta_tolerance(int k, double mu_phi, double R_phi_sq, double L_phi,
                       double R, double theta, double A_next, double mu_rel) {
  if (k < 1) throw InputError("delta_tolerance needs k >= 1");
  if (!(mu_phi > 0.0) || !(R_phi_sq > 0.0) || !(L_phi > 0.0) || !(R > 0.0) ||
      !(theta >= 0.0) || !(A_next >= 0.0) || !(mu_rel >= 0.0))
    throw InputError("delta_tolerance: invalid inputs");
  double lin = 2.0 * L_phi * R + 3.0 * theta;
  double kk = static_cast<double>(k);
  return mu_phi * R_phi_sq * R_phi_sq /
         (2.0 * kk * kk * lin * lin * (1.0 + A_next * mu_rel));
}

}  // namespace inspag
