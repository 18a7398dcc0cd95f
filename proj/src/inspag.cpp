#include "inspag/inspag.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

namespace {

constexpr double kPrecisionMargin = 1e3;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

double PsiProblem::value(const Vec& x) const {
  return linear_term.dot(x) + phi_scale * phi_value(*precond, x);
}

Vec PsiProblem::grad(const Vec& x) const {
  return linear_term + phi_scale * phi_gradient(*precond, x);
}

SmoothOracle PsiProblem::oracle() const {
  SmoothOracle f;
  PsiProblem self = *this;
  f.value = [self](const Vec& x) { return self.value(x); };
  f.grad = [self](const Vec& x) { return self.grad(x); };
  f.hvp = [self](const Vec& x, const Vec& v) {
    return Vec(self.phi_scale * phi_hessian_vec(*self.precond, x, v));
  };
  f.d3_bilinear = [self](const Vec& x, const Vec& h) {
    return Vec(self.phi_scale * phi_third_bilinear(*self.precond, x, h));
  };
  f.hessian = [self](const Vec& x) {
    return Mat(self.phi_scale * phi_hessian_dense(*self.precond, x));
  };
  f.l3 = l3();
  return f;
}

PsiProblem build_psi(double alpha_next, const Vec& grad_F_y, double A_k,
                     double mu_rel, const Preconditioner& p, const Vec& u_k,
                     const Vec& y_next) {
  const Index d = p.dim();
  if (grad_F_y.size() != d || u_k.size() != d || y_next.size() != d)
    throw InputError("build_psi: dimension mismatch");
  PsiProblem psi;
  psi.precond = &p;
  psi.linear_term = alpha_next * grad_F_y -
                    (1.0 + A_k * mu_rel) * phi_gradient(p, u_k) -
                    alpha_next * mu_rel * phi_gradient(p, y_next);
  psi.phi_scale = 1.0 + (A_k + alpha_next) * mu_rel;
  return psi;
}

ThetaEstimator::ThetaEstimator(ThetaMode mode, double user_theta)
    : mode_(mode), user_theta_(user_theta) {
  if (mode == ThetaMode::user && !(user_theta >= 0.0))
    throw InputError("user theta must be nonnegative");
}

void ThetaEstimator::observe(double grad_F_norm, double grad_phi_norm,
                             double mu_rel) {
  if (!(mu_rel > 0.0)) throw InputError("theta observation needs mu_rel > 0");
  running_ = std::max({running_, grad_F_norm / mu_rel, grad_phi_norm});
  seen_ = true;
}

double ThetaEstimator::value() const {
  if (mode_ == ThetaMode::user) return user_theta_;
  if (!seen_) throw InputError("online theta needs at least one observation");
  return 2.0 * running_;
}

double theta_estimate(ThetaMode mode, const std::vector<ThetaObservation>& observed,
                      double mu_rel, double user_theta) {
  ThetaEstimator est(mode, user_theta);
  if (mode == ThetaMode::online)
    for (const auto& o : observed) est.observe(o.grad_F_norm, o.grad_phi_norm, mu_rel);
  return est.value();
}

DistributedObjective::DistributedObjective(const SparseDataset& data,
                                           double lambda_sparse,
                                           double lambda_dense,
                                           std::vector<char> is_sparse, Index m,
                                           std::uint64_t seed, bool parallel)
    : pool_(partition(data, m, seed)), dim_(data.dim()) {
  pool_.parallel = parallel;
  shards_.reserve(m);
  for (Index j = 0; j < m; ++j)
    shards_.emplace_back(data.subset(pool_.rows(j)), lambda_sparse, lambda_dense,
                         is_sparse);
}

double DistributedObjective::evaluate(const Vec& x, Vec& grad) {
  if (x.size() != dim_) throw InputError("objective: dimension mismatch");
  auto task = [this](Index j, const Vec& point) {
    if (fail_worker && *fail_worker == j) throw std::runtime_error("injected failure");
    Vec out(point.size() + 1);
    Vec g;
    out[0] = value_and_gradient(shards_[j], point, g);
    out.tail(point.size()) = g;
    return out;
  };
  Vec r = broadcast_reduce(pool_, x, task, ledger_);
  grad = r.tail(dim_);
  return r[0];
}

Vec DistributedObjective::aggregate_gradient(const Vec& x) {
  Vec g;
  evaluate(x, g);
  return g;
}

double default_radius(const LogRegProblem& local) {
  const double L = smoothness_constants(local).l_smooth;
  Vec x = Vec::Zero(local.dim());
  for (int i = 0; i < 100; ++i) x -= gradient(local, x) / L;
  double r = 10.0 * x.norm();
  return r > 0.0 ? r : 1.0;
}

InspagSetup make_setup(const SparseDataset& data, const InspagConfig& cfg) {
  if (data.dim() < 1) throw InputError("dataset has no features");
  if (cfg.n_precond < 1 || cfg.n_precond > data.size())
    throw InputError(fmt::format("n_precond must lie in [1, {}]", data.size()));
  if (!(cfg.sigma > 0.0)) throw InputError("sigma must be positive");
  if (!(cfg.lambda1 > 0.0) || !(cfg.lambda2 > 0.0))
    throw InputError("lambda1 and lambda2 must be positive");
  if (!(cfg.M0 > 0.0)) throw InputError("M0 must be positive");
  if (cfg.K_max < 0) throw InputError("K_max must be nonnegative");
  if (!(cfg.R >= 0.0) || !(cfg.R_phi_sq >= 0.0) || !(cfg.mu_rel >= 0.0) ||
      cfg.mu_rel > 1.0)
    throw InputError("R, R_phi_sq must be >= 0 and mu_rel in [0, 1]");
  if (!(cfg.c_rate > 0.0)) throw InputError("c_rate must be positive");

  InspagSetup s;
  s.cfg = cfg;
  auto mask = sparse_feature_mask(data, cfg.sparse_threshold);
  LogRegProblem full(data, cfg.lambda1, cfg.lambda2, mask);
  s.F_constants = smoothness_constants(full);
  s.rel = relative_constants(s.F_constants.mu_strong, cfg.sigma);

  WorkerPool order = partition(data, 1, cfg.seed);
  std::vector<Index> rows(order.order.begin(), order.order.begin() + cfg.n_precond);
  LogRegProblem local(data.subset(rows), cfg.lambda1, cfg.lambda2, mask);
  s.precond = Preconditioner(local, cfg.sigma);

  if (s.cfg.R == 0.0) s.cfg.R = default_radius(local);
  if (s.cfg.R_phi_sq == 0.0) s.cfg.R_phi_sq = 2.0 * s.precond.l_phi() * s.cfg.R * s.cfg.R;
  if (s.cfg.mu_rel == 0.0) s.cfg.mu_rel = s.rel.mu_rel;
  return s;
}

InspagDriver::InspagDriver(const SparseDataset& data, const InspagConfig& cfg, Index m)
    : setup_(make_setup(data, cfg)),
      obj_(data, cfg.lambda1, cfg.lambda2, setup_.precond.local_problem().is_sparse(),
           m, cfg.seed, cfg.parallel),
      theta_(cfg.theta_mode, cfg.theta),
      wall_start_ms_(now_ms()) {
  state_.agm = agm_init(Vec::Zero(data.dim()), cfg.M0);
}

void InspagDriver::initialize() {
  const auto& c = setup_.cfg;
  state_.f_x = obj_.evaluate(state_.agm.x, state_.grad_x);
  theta_.observe(state_.grad_x.norm(),
                 phi_gradient(setup_.precond, state_.agm.x).norm(), c.mu_rel);
  trajectory_.push_back(state_.agm.x);
  RoundRecord r;
  r.round = obj_.ledger().rounds;
  r.M = state_.agm.M;
  r.f_value = state_.f_x;
  r.grad_norm = state_.grad_x.norm();
  r.bytes = obj_.ledger().bytes_up + obj_.ledger().bytes_down;
  r.wall_ms = now_ms() - wall_start_ms_;
  r.accepted = true;
  records_.push_back(r);
}

double InspagDriver::certificate() const {
  const auto& c = setup_.cfg;
  int K = state_.agm.k;
  if (K < 1) return std::numeric_limits<double>::infinity();
  return 2.0 * setup_.precond.l_phi() * c.R * c.R * (1.0 + std::log(K)) / state_.agm.A;
}

bool InspagDriver::certificate_met() const {
  return setup_.cfg.target > 0.0 && certificate() <= setup_.cfg.target;
}

void InspagDriver::round() {
  if (precision_limited_) return;
  if (trajectory_.empty()) initialize();
  const auto& c = setup_.cfg;
  const Preconditioner& p = setup_.precond;
  AgmState& s = state_.agm;
  const double mu = c.mu_rel;
  const int k_idx = std::max(s.k, 1);
  const double delta_tilde = c.R_phi_sq / k_idx;
  const double M_cap = c.M_cap_factor * c.M0;
  const Vec grad_phi_u = phi_gradient(p, s.u);

  for (int trial = 1;; ++trial) {
    const double M = std::ldexp(s.M, trial - 2);
    if (M > M_cap)
      throw ConvergenceError(
          fmt::format("round {}: M exceeded cap {:.3e}", s.k + 1, M_cap), M);
    const double alpha = solve_alpha(s.A, mu, 0.0, M);
    const double A_next = s.A + alpha;
    Vec y = (alpha * s.u + s.A * s.x) / A_next;

    // Psi's terms grow like A_k. Once the rounding floor of grad Psi, times R,
    // reaches delta~ / kPrecisionMargin the hand-off certificate is no longer
    // checkable; stop before spending the round.
    const double psi_terms =
        alpha * state_.grad_x.norm() + (1.0 + s.A * mu) * grad_phi_u.norm() +
        alpha * mu * phi_gradient(p, y).norm() + (1.0 + A_next * mu) * grad_phi_u.norm();
    if (kPrecisionMargin * c.R * std::numeric_limits<double>::epsilon() * psi_terms >=
        delta_tilde) {
      precision_limited_ = true;
      return;
    }

    Vec g_y;
    const double F_y = obj_.evaluate(y, g_y);
    theta_.observe(g_y.norm(), phi_gradient(p, y).norm(), mu);

    PsiProblem psi = build_psi(alpha, g_y, s.A, mu, p, s.u, y);
    const double Delta = delta_tolerance(k_idx, p.mu_phi(), c.R_phi_sq, p.l_phi(),
                                         c.R, theta_.value(), A_next, mu);
    RestartScheduleStrong sched;
    sched.R0 = 2.0 * c.R;
    sched.mu = psi.mu();
    sched.c = c.c_rate;
    HyperfastConfig inner = c.inner;
    if (l3_hint_ > 0.0) inner.l3_init = l3_hint_ * psi.phi_scale;
    RestartResult sub;
    try {
      sub = restart_strongly_convex(psi.oracle(), s.u, sched, Delta, inner);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(fmt::format("round {}: {}", s.k + 1, e.what()), e.achieved());
    }
    if (sub.stats.l3_last > 0.0) l3_hint_ = sub.stats.l3_last / psi.phi_scale;
    const Vec& u_next = sub.z;
    state_.inner_iters += sub.stats.steps;

    // Ball certificate: min over ||x|| <= R of <g, x - u> is -R||g|| - <g, u>.
    Vec g_psi = psi.grad(u_next);
    double slack = -c.R * g_psi.norm() - g_psi.dot(u_next) + delta_tilde;
    bool in_ball = u_next.norm() <= c.R * (1.0 + 1e-12);

    Vec x_next = (alpha * u_next + s.A * s.x) / A_next;
    Vec g_x;
    const double F_x = obj_.evaluate(x_next, g_x);
    theta_.observe(g_x.norm(), phi_gradient(p, x_next).norm(), mu);

    double rhs = F_y + g_y.dot(x_next - y) +
                 M * alpha * alpha / (A_next * A_next) * bregman_div(p, s.u, u_next) +
                 c.crit_slack * std::abs(F_y);
    bool accepted = F_x <= rhs;

    if (accepted) {
      s.history.push_back({s.k + 1, A_next, M, alpha, F_x, trial});
      s.k += 1;
      s.A = A_next;
      s.M = M;
      s.x = x_next;
      s.y = y;
      s.u = u_next;
      state_.f_x = F_x;
      state_.grad_x = g_x;
      trajectory_.push_back(s.x);
    }

    RoundRecord r;
    r.round = obj_.ledger().rounds;
    r.trial = trial;
    r.k = s.k;
    r.A = accepted ? s.A : A_next;
    r.M = M;
    r.alpha = alpha;
    r.f_value = state_.f_x;
    r.grad_norm = state_.grad_x.norm();
    r.inner_iters = sub.stats.steps;
    r.delta_k_tol = Delta;
    r.bytes = obj_.ledger().bytes_up + obj_.ledger().bytes_down;
    r.wall_ms = now_ms() - wall_start_ms_;
    r.accepted = accepted;
    r.projection_slack = slack;
    r.in_ball = in_ball;
    records_.push_back(r);
    if (!in_ball)
      throw InputError(fmt::format(
          "round {}: subproblem solution has norm {:.3e} > R = {:.3e}; increase --radius",
          s.k + (accepted ? 0 : 1), u_next.norm(), c.R));
    if (accepted) return;
  }
}

InspagResult run_inspag(const InspagConfig& cfg, const SparseDataset& data,
                        Index m_workers) {
  InspagDriver drv(data, cfg, m_workers);
  if (cfg.K_max > 0) {
    drv.initialize();
    while (drv.state().agm.k < cfg.K_max && !drv.certificate_met() &&
           !drv.precision_limited())
      drv.round();
  }
  InspagResult out;
  out.setup = drv.setup();
  out.state = drv.state().agm;
  out.trajectory = drv.trajectory();
  if (out.trajectory.empty()) out.trajectory.push_back(out.state.x);
  out.records = drv.records();
  out.ledger = drv.objective().ledger();
  out.certified = drv.certificate_met();
  out.precision_limited = drv.precision_limited();
  out.inner_iters = drv.state().inner_iters;
  return out;
}

}  // namespace inspag
