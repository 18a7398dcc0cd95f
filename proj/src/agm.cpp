#include "inspag/agm.hpp"

#include <cmath>

#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

InexactnessSchedule InexactnessSchedule::constant(double delta,
                                                  double delta_tilde) {
  InexactnessSchedule s;
  s.delta = [delta](int) { return delta; };
  s.delta_tilde = [delta_tilde](int) { return delta_tilde; };
  return s;
}

AgmState agm_init(const Vec& x0, double M0) {
  if (!(M0 > 0.0)) throw InputError("M0 must be positive");
  AgmState s;
  s.M = M0;
  s.x = x0;
  s.y = x0;
  s.u = x0;
  return s;
}

double solve_alpha(double A_k, double mu, double m, double M_next) {
  if (!(M_next > 0.0) || !(A_k >= 0.0) || !(mu >= 0.0) || !(m >= 0.0))
    throw InputError("solve_alpha: need M > 0 and A, mu, m >= 0");
  double c = 1.0 + A_k * (mu + m);
  double disc = c * c + 4.0 * M_next * c * A_k;
  if (!(disc > 0.0) || !std::isfinite(disc))
    throw InternalError("solve_alpha: nonpositive discriminant");
  // b = -c < 0, so the + root has no cancellation.
  return (c + std::sqrt(disc)) / (2.0 * M_next);
}

AgmState agm_step(const AgmState& state, const ModelOracle& oracle,
                  const InexactnessSchedule& schedule, const AgmOptions& opts) {
  const double mu = oracle.mu();
  const double m = oracle.m();
  const double delta = schedule.delta(state.k);
  const double delta_tilde = schedule.delta_tilde(state.k);
  const double cap = opts.M_cap_factor * opts.M0;

  double M_trial = 0.5 * state.M;
  for (int trial = 1;; ++trial) {
    if (M_trial > cap)
      throw ConvergenceError(
          fmt::format("step {}: M exceeded cap {:g}; model constants look wrong",
                      state.k, cap),
          M_trial);
    double alpha = solve_alpha(state.A, mu, m, M_trial);
    double A_next = state.A + alpha;
    Vec y = (alpha * state.u + state.A * state.x) / A_next;

    ProjectionTask task;
    task.alpha = alpha;
    task.anchor = y;
    task.prox_center = state.u;
    task.weight_u = 1.0 + state.A * (mu + m);
    task.weight_y = alpha * mu;
    Vec u = oracle.project(task, delta_tilde);
    Vec x = (alpha * u + state.A * state.x) / A_next;

    double fx = oracle.f_delta(x);
    double rhs = oracle.f_delta(y) + oracle.psi_delta(x, y) +
                 M_trial * alpha * alpha / (A_next * A_next) *
                     oracle.bregman(state.u, u) +
                 delta;
    if (fx <= rhs) {
      AgmState next;
      next.k = state.k + 1;
      next.A = A_next;
      next.M = M_trial;
      next.x = std::move(x);
      next.y = std::move(y);
      next.u = std::move(u);
      next.history = state.history;
      next.history.push_back({next.k, A_next, M_trial, alpha, fx, trial});
      return next;
    }
    M_trial *= 2.0;
  }
}

AgmRun run_agm(const Vec& x0, const ModelOracle& oracle,
               const InexactnessSchedule& schedule, int K,
               const AgmOptions& opts) {
  if (K < 1) throw InputError("run_agm needs K >= 1");
  AgmRun run;
  run.state = agm_init(x0, opts.M0);
  run.trajectory.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    run.state = agm_step(run.state, oracle, schedule, opts);
    const AgmRecord& r = run.state.history.back();
    run.trajectory.push_back(
        {r.k, r.A, r.M, r.alpha, run.state.x, run.state.y, run.state.u});
  }
  return run;
}

namespace {

void check_M_seq(const std::vector<double>& M_seq, int N) {
  if (M_seq.empty() || N < 1) throw InputError("lower bound needs a nonempty M sequence");
  if (static_cast<std::size_t>(N) > M_seq.size())
    throw InputError("lower bound: N exceeds the M sequence length");
  for (int k = 0; k < N; ++k)
    if (!(M_seq[static_cast<std::size_t>(k)] > 0.0))
      throw InputError("lower bound: M values must be positive");
}

}  // namespace

double a_lower_bound(const std::vector<double>& M_seq, double mu, double m,
                     int N) {
  check_M_seq(M_seq, N);
  double s = 0.0;
  for (int k = 0; k < N; ++k) s += 1.0 / std::sqrt(M_seq[static_cast<std::size_t>(k)]);
  double mean = s / N;  // Mt^{-1/2}
  double poly = 0.25 * static_cast<double>(N) * N * mean * mean;
  double expo = std::exp(N * std::sqrt((mu + m) / 4.0) * mean) / M_seq[0];
  return std::max(poly, expo);
}

double a_lower_bound_product(const std::vector<double>& M_seq, double mu,
                             double m, int N) {
  check_M_seq(M_seq, N);
  double s = 0.0;
  for (int k = 0; k < N; ++k) s += 1.0 / std::sqrt(M_seq[static_cast<std::size_t>(k)]);
  double log_prod = 0.0;
  for (int k = 1; k < N; ++k)
    log_prod += 2.0 * std::log1p(std::sqrt((mu + m) / (4.0 * M_seq[static_cast<std::size_t>(k)])));
  return std::max(0.25 * s * s, std::exp(log_prod) / M_seq[0]);
}

double agm_error_bound(const std::vector<AgmRecord>& history, int N, double d0,
                      const InexactnessSchedule& schedule) {
  if (N < 1 || static_cast<std::size_t>(N) > history.size())
    throw InputError("agm_error_bound: N outside the recorded history");
  double acc = d0;
  for (int k = 0; k < N; ++k) {
    double A_next = history[static_cast<std::size_t>(k)].A;
    acc += 2.0 * A_next * schedule.delta(k) + schedule.delta_tilde(k);
  }
  return acc / history[static_cast<std::size_t>(N - 1)].A;
}

}  // namespace inspag
