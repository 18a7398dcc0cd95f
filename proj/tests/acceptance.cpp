// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "inspag/agm.hpp"
#include "inspag/agm_models.hpp"
#include "inspag/hyperfast.hpp"
#include "inspag/inspag.hpp"
#include "inspag/oracle_check.hpp"
#include "inspag/reference.hpp"

using namespace inspag;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, std::string line) {
    pass = pass && ok;
    details.push_back((ok ? "ok   " : "BAD  ") + std::move(line));
  }
  void note(std::string line) { details.push_back("     " + std::move(line)); }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

// Tolerances, pinned.
constexpr double kGradTol = 1e-6, kHvpTol = 1e-5, kThirdTol = 1e-4;
constexpr int kOraclePoints = 12;
constexpr double kDelta = 1e-4;
constexpr double kEndToEndGap = 1e-8;
constexpr long kEndToEndRounds = 60;
constexpr double kSameTrajectory = 1e-10;
constexpr double kPrecondGap = 1e-6;

InspagConfig end_to_end_config(Index n_precond) {
  InspagConfig c;
  c.n_precond = n_precond;
  c.sigma = 1e-3;
  c.lambda1 = 1e-3;
  c.lambda2 = 1e-3;
  c.K_max = 60;
  c.seed = 1;
  return c;
}

const SparseDataset& synthetic_instance() {
  static SparseDataset d = generate_synthetic(1, 2000, 20, 0.5);
  return d;
}

const ReferenceSolution& synthetic_reference() {
  static ReferenceSolution r = [] {
    const auto& d = synthetic_instance();
    LogRegProblem full(d, 1e-3, 1e-3, sparse_feature_mask(d, 0.1));
    return reference_solve(full, 1e-13, 500);
  }();
  return r;
}

void check_hand_offs(Outcome& o, const std::vector<RoundRecord>& recs, const std::string& label) {
  int n = 0, bad = 0;
  double worst = INFINITY;
  for (const auto& r : recs) {
    if (r.trial == 0) continue;
    ++n;
    worst = std::min(worst, r.projection_slack);
    if (!(r.projection_slack >= 0.0) || !r.in_ball) ++bad;
  }
  o.check(bad == 0 && n > 0,
          fmt::format("{}: {} hand-offs, {} violations, min slack {:.3e}", label, n, bad, worst));
}

// 1
Outcome oracle_suite() {
  Outcome o;
  struct Inst {
    std::string name;
    SparseDataset data;
    double scale;
  };
  std::vector<Inst> insts = {
      {"synthetic 200x5 dense", generate_synthetic(11, 200, 5, 1.0), 1.0},
      {"synthetic 500x20 density 0.3", generate_synthetic(12, 500, 20, 0.3), 1.0},
      {"synthetic 50x8 density 0.5, large x", generate_synthetic(13, 50, 8, 0.5), 4.0},
  };
  OracleTolerances tol{kGradTol, kHvpTol, kThirdTol};
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const auto& in = insts[i];
    LogRegProblem p(in.data, 1e-3, 1e-3, sparse_feature_mask(in.data, 0.1));
    auto e = fd_oracle_errors(logistic_oracle(p), p.dim(), kOraclePoints, 100 + i, in.scale);
    bool ok = e.points >= 10 && oracle_failures(e, tol).empty();
    o.check(ok, fmt::format("{}: {} points, grad {:.2e}, hvp {:.2e}, third {:.2e}", in.name,
                            e.points, e.gradient, e.hvp, e.third));
  }
  return o;
}

GradientModel quadratic_model(const QuadraticObjective& q, double L, double mu) {
  return GradientModel([q](const Vec& x) { return q.value(x); },
                       [q](const Vec& x) { return q.grad(x); },
                       L * Mat::Identity(q.b.size(), q.b.size()), mu / L);
}

// 2
Outcome exact_certificate() {
  Outcome o;
  const Index d = 20;
  const double mu = 1e-2, L = 1.0;
  auto q = random_quadratic(d, mu, L, 1);
  auto model = quadratic_model(q, L, mu);
  Vec x0 = Vec::Zero(d), xs = q.minimizer();
  const double fs = q.min_value(), d0 = model.bregman(x0, xs);
  auto sched = InexactnessSchedule::exact();
  auto run = run_agm(x0, model, sched, 100);

  int bound_bad = 0, lit_bad = 0, lit_bad_after_1 = 0, prod_bad = 0;
  std::vector<double> Ms;
  std::string first_lit;
  for (int N = 1; N <= 100; ++N) {
    const auto& it = run.trajectory[static_cast<std::size_t>(N - 1)];
    Ms.push_back(it.M);
    if (q.value(it.x) - fs > agm_error_bound(run.state.history, N, d0, sched)) ++bound_bad;
    double lit = a_lower_bound(Ms, mu / L, 0.0, N);
    if (it.A < lit) {
      ++lit_bad;
      if (N > 1) ++lit_bad_after_1;
      if (first_lit.empty())
        first_lit = fmt::format("N = {}: A_N = {:.6g} < {:.6g}", N, it.A, lit);
    }
    if (it.A < a_lower_bound_product(Ms, mu / L, 0.0, N) * (1.0 - 1e-12)) ++prod_bad;
  }
  o.check(bound_bad == 0, fmt::format("error bound violated at {} of 100 iterations; final gap {:.3e}",
                                      bound_bad, q.value(run.state.x) - fs));
  o.check(lit_bad == 0, fmt::format("A_N below max(N^2/(4Mt), exp(N sqrt(mu/(4Mt)))/M_1) at {} of 100 N{}",
                                    lit_bad, first_lit.empty() ? "" : "; first " + first_lit));
  o.note(fmt::format("same bound for N >= 2: {} violations", lit_bad_after_1));
  o.note(fmt::format("product form (1/M_1) prod (1 + sqrt(mu/(4M)))^2: {} violations", prod_bad));
  o.note("A_1 = 1/M_1 exactly, below e^{sqrt(mu/(4 M_1))}/M_1 whenever mu > 0");
  return o;
}

// 3
Outcome inexact_floor() {
  Outcome o;
  const Index d = 20;
  const double mu = 1e-2, L = 1.0;
  auto q = random_quadratic(d, mu, L, 2);
  auto model = quadratic_model(q, L, mu);
  Vec x0 = Vec::Zero(d), xs = q.minimizer();
  // delta/2 value shift and a gradient bias with |<b, x - y>| <= delta/2 while
  // iterates stay within 2||x*||: together a delta-model.
  Vec b = Vec::Ones(d) * (kDelta / 2.0 / (4.0 * xs.norm() * std::sqrt(static_cast<double>(d))));
  model.set_inexactness(b, kDelta / 2.0);
  auto sched = InexactnessSchedule::constant(kDelta, 0.0);
  const int K = 300;
  auto run = run_agm(x0, model, sched, K);
  const double fs = q.min_value(), d0 = model.bregman(x0, xs);
  int bound_bad = 0, outside = 0;
  for (int N = 1; N <= K; ++N) {
    const auto& it = run.trajectory[static_cast<std::size_t>(N - 1)];
    if (it.x.norm() > 2.0 * xs.norm() || it.y.norm() > 2.0 * xs.norm()) ++outside;
    if (q.value(it.x) - fs > agm_error_bound(run.state.history, N, d0, sched)) ++bound_bad;
  }
  double floor = 0.0;
  for (int N = K - 20; N <= K; ++N)
    floor = std::max(floor, q.value(run.trajectory[static_cast<std::size_t>(N - 1)].x) - fs);
  double remaining = d0 / run.state.A;  // delta~ = 0
  o.check(outside == 0, fmt::format("iterates leave the region where the bias is bounded: {}", outside));
  o.check(bound_bad == 0, fmt::format("error bound with delta = {:.0e} violated at {} of {} iterations",
                                      kDelta, bound_bad, K));
  o.check(floor <= 2.0 * kDelta + remaining,
          fmt::format("floor over last 20 iterations {:.3e} <= 2 delta + D/A_N = {:.3e}", floor,
                      2.0 * kDelta + remaining));
  return o;
}

struct TinyLogistic {
  LogRegProblem p;
  ReferenceSolution ref;
};

const TinyLogistic& tiny_logistic() {
  static TinyLogistic t = [] {
    auto data = generate_synthetic(3, 10, 3, 1.0);
    LogRegProblem p(data, 1e-3, 1e-3, sparse_feature_mask(data, 0.1));
    auto ref = reference_solve(p, 1e-14, 500);
    return TinyLogistic{p, ref};
  }();
  return t;
}

// 4
Outcome hyperfast_envelope() {
  Outcome o;
  const auto& t = tiny_logistic();
  auto f = logistic_oracle(t.p);
  Vec z0 = Vec::Zero(3);
  const double R0 = (z0 - t.ref.x).norm();
  o.note(fmt::format("reference gradient norm {:.2e}, R0 = {:.4f}, L3 = {:.4g}", t.ref.grad_norm, R0, f.l3));
  o.check(t.ref.grad_norm <= 1e-12, "reference solve converged");
  for (int N : {5, 10, 20}) {
    Vec z = basic_hyperfast(f, z0, N);
    double gap = f.value(z) - t.ref.f;
    double env = 48.0 * f.l3 * std::pow(R0, 4) / std::pow(N, 5);
    o.check(gap <= env, fmt::format("N = {:2d}: gap {:.3e} <= {:.3e}", N, gap, env));
  }
  return o;
}

SmoothOracle quartic_test_function(double a) {
  SmoothOracle f;
  f.value = [a](const Vec& x) { return 0.25 * x.array().pow(4).sum() + 0.5 * a * x.squaredNorm(); };
  f.grad = [a](const Vec& x) -> Vec { return x.array().cube().matrix() + a * x; };
  f.hvp = [a](const Vec& x, const Vec& v) -> Vec {
    return (3.0 * x.array().square() * v.array()).matrix() + a * v;
  };
  f.d3_bilinear = [](const Vec& x, const Vec& h) -> Vec {
    return (6.0 * x.array() * h.array().square()).matrix();
  };
  f.l3 = 6.0;
  return f;
}

// 5
Outcome restart_halving() {
  Outcome o;
  const auto& t = tiny_logistic();
  auto f = logistic_oracle(t.p);
  RestartScheduleStrong s;
  s.mu = smoothness_constants(t.p).mu_strong;
  s.R0 = 2.0 * t.ref.x.norm();
  auto res = restart_strongly_convex(f, Vec::Zero(3), s, 1e-12);
  const double R = 0.5 * s.R0;
  int bad = 0;
  for (const auto& e : res.log) {
    double bound = 2.0 * s.mu * R * R * std::pow(2.0, -2 * e.t);
    if (e.value - t.ref.f > bound) ++bad;
  }
  o.check(bad == 0 && res.restarts > 0,
          fmt::format("strong: {} restarts, {} steps, {} violations of 2 mu R^2 2^(-2t)", res.restarts,
                      res.total_steps, bad));
  for (double q : {2.0, 4.0}) {
    auto g = quartic_test_function(q == 2.0 ? 1.0 : 0.0);
    RestartScheduleUniform u;
    u.q = q;
    u.sigma_q = q == 2.0 ? 1.0 : 1.0 / 3.0;
    Vec z0 = Vec::Constant(4, 1.5);
    u.Delta0 = g.value(z0);
    auto r = restart_uniformly_convex(g, u, z0, 1e-8);
    int ubad = 0;
    for (const auto& e : r.log)
      if (e.value > e.certified || e.certified != 0.5 * e.radius) ++ubad;
    o.check(ubad == 0 && r.restarts > 0,
            fmt::format("uniform q = {}: {} restarts, {} steps, {} violations of f - f* <= Delta_k", q,
                        r.restarts, r.total_steps, ubad));
  }
  return o;
}

struct EndToEnd {
  InspagResult res;
  double kappa_phi = 0.0;
};

// 6
Outcome end_to_end(std::vector<RoundRecord>* hand_offs) {
  Outcome o;
  const auto& data = synthetic_instance();
  const auto& ref = synthetic_reference();
  o.note(fmt::format("reference f = {:.15g}, gradient norm {:.2e}", ref.f, ref.grad_norm));
  InspagDriver drv(data, end_to_end_config(500), 4);
  drv.initialize();
  const auto& setup = drv.setup();
  const double kappa = setup.precond.kappa_phi();
  const double Lphi = setup.precond.l_phi(), R = setup.cfg.R;
  long hit = -1;
  int cert_bad = 0, M_bad = 0;
  double M_max = 0.0;
  while (drv.objective().ledger().rounds < kEndToEndRounds && !drv.precision_limited()) {
    drv.round();
    const auto& st = drv.state();
    double gap = st.f_x - ref.f;
    double cert = 2.0 * Lphi * R * R * (1.0 + std::log(st.agm.k)) / st.agm.A;
    if (gap > cert) ++cert_bad;
    M_max = std::max(M_max, st.agm.M);
    if (st.agm.M > 2.0 * kappa) ++M_bad;
    if (hit < 0 && gap <= kEndToEndGap) hit = drv.objective().ledger().rounds;
  }
  o.check(hit > 0 && hit <= kEndToEndRounds,
          fmt::format("gap <= {:.0e} first at communication round {} (limit {})", kEndToEndGap, hit,
                      kEndToEndRounds));
  o.check(cert_bad == 0, fmt::format("rate certificate violated at {} of {} iterations", cert_bad,
                                     drv.state().agm.k));
  o.check(M_bad == 0, fmt::format("largest accepted M {:.3g} <= 2 kappa_phi = {:.3g}", M_max, 2.0 * kappa));
  o.note(fmt::format("final gap {:.3e} after {} iterations, {} rounds", drv.state().f_x - ref.f,
                     drv.state().agm.k, drv.objective().ledger().rounds));
  hand_offs->insert(hand_offs->end(), drv.records().begin(), drv.records().end());
  return o;
}

// 8
Outcome distributed_equals_serial(std::vector<RoundRecord>* hand_offs) {
  Outcome o;
  const auto& data = synthetic_instance();
  auto cfg = end_to_end_config(500);
  cfg.K_max = 25;
  std::vector<InspagResult> runs;
  for (Index m : {1, 2, 8}) runs.push_back(run_inspag(cfg, data, m));
  double worst = 0.0;
  bool same_len = true;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    same_len = same_len && runs[r].trajectory.size() == runs[0].trajectory.size();
    for (std::size_t k = 0; k < std::min(runs[r].trajectory.size(), runs[0].trajectory.size()); ++k)
      worst = std::max(worst, (runs[r].trajectory[k] - runs[0].trajectory[k]).lpNorm<Eigen::Infinity>());
  }
  o.check(same_len && worst <= kSameTrajectory,
          fmt::format("m = 1, 2, 8: {} iterates, max coordinate difference {:.2e}",
                      runs[0].trajectory.size(), worst));
  const Index ms[] = {1, 2, 8};
  for (std::size_t r = 0; r < runs.size(); ++r) {
    // One round at x0, then two per trial (at y and at the candidate x).
    long trials = 0;
    for (const auto& rec : runs[r].records) trials += rec.trial > 0 ? 1 : 0;
    long expected = 1 + 2 * trials;
    const auto& L = runs[r].ledger;
    long payload = 0;
    for (const auto& c : L.per_round) payload += c.payload;
    const long d = data.dim();
    bool bytes_ok = L.bytes_down == expected * ms[r] * d * 8 &&
                    L.bytes_up == expected * ms[r] * (d + 1) * 8 &&
                    payload == L.bytes_up + L.bytes_down;
    o.check(L.rounds == expected && static_cast<long>(L.per_round.size()) == expected && bytes_ok,
            fmt::format("m = {}: ledger {} rounds, {} aggregation calls, {} bytes", ms[r], L.rounds,
                        expected, L.bytes_up + L.bytes_down));
    hand_offs->insert(hand_offs->end(), runs[r].records.begin(), runs[r].records.end());
  }
  return o;
}

long rounds_to(const SparseDataset& data, Index n, double f_star, double tol, int K_max,
               std::vector<RoundRecord>* hand_offs) {
  auto cfg = end_to_end_config(n);
  InspagDriver drv(data, cfg, 4);
  drv.initialize();
  long hit = -1;
  while (hit < 0 && drv.state().agm.k < K_max && !drv.precision_limited()) {
    drv.round();
    if (drv.state().f_x - f_star <= tol) hit = drv.objective().ledger().rounds;
  }
  hand_offs->insert(hand_offs->end(), drv.records().begin(), drv.records().end());
  return hit;
}

// 9
Outcome preconditioning_effect(std::vector<RoundRecord>* hand_offs) {
  Outcome o;
  const auto& ref = synthetic_reference();
  long r100 = rounds_to(synthetic_instance(), 100, ref.f, kPrecondGap, 200, hand_offs);
  long r1000 = rounds_to(synthetic_instance(), 1000, ref.f, kPrecondGap, 200, hand_offs);
  o.check(r100 > 0 && r1000 > 0 && r1000 < r100,
          fmt::format("rounds to gap {:.0e}: n = 100 -> {}, n = 1000 -> {}", kPrecondGap, r100, r1000));
  return o;
}

}  // namespace

int main() {
  std::vector<RoundRecord> hand_offs;
  std::vector<Criterion> crits = {
      {1, "oracle suite vs finite differences", 10.0, oracle_suite},
      {2, "exact-model error bound and growth of A_N", 5.0, exact_certificate},
      {3, "inexact model floor", 5.0, inexact_floor},
      {4, "tensor method rate envelope", 60.0, hyperfast_envelope},
      {5, "restart halving", 60.0, restart_halving},
      {6, "end-to-end on the synthetic instance", 120.0, [&] { return end_to_end(&hand_offs); }},
      {8, "distributed equals serial, ledger counts", 120.0,
       [&] { return distributed_equals_serial(&hand_offs); }},
      {9, "preconditioning reduces rounds", 120.0,
       [&] { return preconditioning_effect(&hand_offs); }},
  };
  int failed = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o, double secs, double budget) {
    bool pass = o.pass && secs <= budget;
    failed += pass ? 0 : 1;
    std::printf("%s [%d] %s (%.2f s, budget %.0f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                secs, budget);
    for (const auto& d : o.details) std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
  };
  for (const auto& c : crits) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(c.id, c.name, o, secs, c.budget_s);
  }
  {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    check_hand_offs(o, hand_offs, "end-to-end runs of criteria 6, 8 and 9");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(7, "projection certificate at every hand-off", o, secs, 1.0);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
