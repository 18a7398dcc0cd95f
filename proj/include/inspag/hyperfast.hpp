#pragma once

#include <functional>
#include <vector>

#include "inspag/logreg.hpp"
#include "inspag/quartic.hpp"

namespace inspag {

struct SmoothOracle {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&, const Vec&)> hvp;
  std::function<Vec(const Vec&, const Vec&)> d3_bilinear;
  // Optional; when empty the Hessian is assembled from hvp columns.
  std::function<Mat(const Vec&)> hessian;
  double l3 = 0.0;
};

SmoothOracle logistic_oracle(const LogRegProblem& p);
Mat dense_hessian(const SmoothOracle& f, const Vec& x);

struct TensorStepConfig {
  double tol = 1e-9;  // on ||grad Omega||, relative to ||grad f(x)||
  int max_iters = 400;
  Index dense_max_dim = 400;
  double quartic_tol = 1e-10;
};

struct TensorStepResult {
  Vec y;
  double model_value = 0.0;  // Omega(y), with Omega(x) = 0
  double model_grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
  bool monotone = true;  // false when Omega went up: l3_step too small
};

// Omega(y) = <g, h> + (1/2) H[h]^2 + (1/6) D3[h]^3 + (L/8)||h||^4, h = y - x.
double tensor_model(const SmoothOracle& f, const Vec& x, double l3_step,
                    const Vec& y);

// Bregman gradient iterations on Omega relative to
// a(h) = (1/2) H[h]^2 + (L/8)||h||^4.
TensorStepResult tensor_step(const SmoothOracle& f, const Vec& x,
                             double l3_step, const TensorStepConfig& cfg = {});

struct HyperfastConfig {
  TensorStepConfig step;
  double l3_init = 0.0;            // 0 means oracle.l3
  double l3_floor_ratio = 1e-12;   // l3 estimate stays >= ratio * oracle.l3
  int line_search_cap = 20;
  int lambda_search_cap = 30;
  double grad_tol = 0.0;  // stop once ||grad f(y_k)|| <= grad_tol
};

struct HyperfastStats {
  long steps = 0;
  long tensor_steps = 0;
  long inner_iters = 0;
  double l3_last = 0.0;
};

// Accelerated tensor method with a large-step (Monteiro-Svaiter) condition
// 1/2 <= lambda L ||y - x~||^2 / 2 <= 3/4 and a doubling/halving search on
// the regularization constant L.
Vec basic_hyperfast(const SmoothOracle& f, const Vec& z0, int N,
                    const HyperfastConfig& cfg = {},
                    HyperfastStats* stats = nullptr);

struct RestartScheduleStrong {
  double R0 = 1.0;
  double mu = 1.0;
  double c = 48.0;
  int t_max = 64;
};

struct RestartScheduleUniform {
  double q = 2.0;
  double sigma_q = 1.0;
  double Delta0 = 1.0;
  double c_hat = 48.0;
  int k_max = 64;
};

struct RestartEntry {
  int t = 0;              // restarts completed
  double radius = 0.0;    // R_{t-1} (strong) or Delta_{t-1} (uniform) used to plan
  int steps_planned = 0;
  long steps_taken = 0;
  double certified = 0.0;  // gap bound after this restart
  double value = 0.0;      // f(z_t)
};

struct RestartResult {
  Vec z;
  int restarts = 0;
  long total_steps = 0;
  std::vector<RestartEntry> log;
  HyperfastStats stats;
};

int strong_restart_steps(double c, double l3, double R_t, double mu);
int uniform_restart_steps(const RestartScheduleUniform& s, double l3,
                          double Delta_k);

RestartResult restart_strongly_convex(const SmoothOracle& f, const Vec& z0,
                                      const RestartScheduleStrong& sched,
                                      double target, HyperfastConfig cfg = {});

RestartResult restart_uniformly_convex(const SmoothOracle& f,
                                       const RestartScheduleUniform& sched,
                                       const Vec& z0, double eps,
                                       HyperfastConfig cfg = {});

// mu_phi (R_phi^2)^2 / (2 k^2 (2 L_phi R + 3 theta)^2 (1 + A_next mu_rel))
double delta_tolerance(int k, double mu_phi, double R_phi_sq, double L_phi,
                       double R, double theta, double A_next, double mu_rel);

}  // namespace inspag
