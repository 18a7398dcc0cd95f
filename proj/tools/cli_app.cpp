#include "cli_app.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "inspag/agm.hpp"
#include "inspag/agm_models.hpp"
#include "inspag/error.hpp"
#include "inspag/hyperfast.hpp"
#include "inspag/inspag.hpp"
#include "inspag/metrics_io.hpp"
#include "inspag/oracle_check.hpp"
#include "inspag/reference.hpp"
#include "inspag/sparse_dataset.hpp"

namespace inspag::cli {

namespace {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string data;
  std::string synthetic = "2000,20,0.5";
  Index workers = 4;
  Index n_precond = 500;
  double lambda1 = 1e-3;
  double lambda2 = 1e-3;
  double sigma = 1e-3;
  double radius = 0.0;
  double m0 = 1.0;
  double c_rate = 48.0;
  int rounds = 200;
  double target = 1e-6;
  std::uint64_t seed = 1;
  std::string out;
  bool no_timing = false;
  bool jsonl = false;
  bool reference = false;
  bool sequential = false;
  double theta = -1.0;  // < 0: online estimate
  std::string objective = "logistic";
  double q = 4.0;
  double sigma_q = 1.0 / 3.0;
  double l3 = 0.0;
  Index dim = 0;
  bool corrupt_gradient = false;
};

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
  const char* v = std::getenv("INSPAG_LOG");
  if (!v) return LogLevel::info;
  std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::quiet;
  if (s == "debug" || s == "2") return LogLevel::debug;
  return LogLevel::info;
}

struct SyntheticSpec {
  Index n = 0, d = 0;
  double density = 0.0;
};

std::optional<SyntheticSpec> parse_synthetic(const std::string& s) {
  SyntheticSpec spec;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> spec.n >> c1 >> spec.d >> c2 >> spec.density) || c1 != ',' || c2 != ',')
    return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return spec;
}

std::vector<std::string> validate(const RunConfig& c, const std::string& cmd) {
  std::vector<std::string> e;
  if (c.data.empty()) {
    auto s = parse_synthetic(c.synthetic);
    if (!s) e.push_back(fmt::format("--synthetic must be N,d,density (got '{}')", c.synthetic));
  }
  if (c.workers < 1) e.push_back("--workers must be >= 1");
  if (c.n_precond < 1) e.push_back("--n-precond must be >= 1");
  if (!(c.lambda1 > 0.0)) e.push_back("--lambda1 must be > 0");
  if (!(c.lambda2 > 0.0)) e.push_back("--lambda2 must be > 0");
  if (!(c.sigma > 0.0)) e.push_back("--sigma must be > 0");
  if (!(c.radius >= 0.0)) e.push_back("--radius must be >= 0 (0 picks a default)");
  if (!(c.m0 > 0.0)) e.push_back("--m0 must be > 0");
  if (!(c.c_rate > 0.0)) e.push_back("--c-rate must be > 0");
  if (c.rounds < 0) e.push_back("--rounds must be >= 0");
  if (!(c.target >= 0.0)) e.push_back("--target must be >= 0");
  if (cmd == "run-hyperfast") {
    if (c.objective != "logistic" && c.objective != "quartic")
      e.push_back("--objective must be logistic or quartic");
    if (!(c.q >= 2.0 && c.q <= 4.0)) e.push_back("--q must lie in [2,4]");
    if (!(c.sigma_q > 0.0)) e.push_back("--sigma-q must be > 0");
    if (!(c.l3 >= 0.0)) e.push_back("--l3 must be >= 0");
    if (!(c.target > 0.0)) e.push_back("--target must be > 0 for run-hyperfast");
  }
  if (c.dim < 0) e.push_back("--dim must be >= 1");
  if (cmd != "check-oracles" && c.out.empty()) e.push_back("--out is required");
  return e;
}

SparseDataset load_data(const RunConfig& c) {
  if (!c.data.empty()) return read_libsvm_file(c.data);
  auto s = parse_synthetic(c.synthetic);
  return generate_synthetic(c.seed, s->n, s->d, s->density);
}

std::string output_base(const std::string& out) {
  const std::string ext = ".csv";
  if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
    return out.substr(0, out.size() - ext.size());
  return out;
}

// All files are rendered first and written together, so a failed run leaves
// nothing behind.
void write_files(const std::vector<std::pair<std::string, std::string>>& files) {
  for (const auto& [path, body] : files) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot open '{}' for writing", path));
    f << body;
    if (!f) throw InputError(fmt::format("failed writing '{}'", path));
  }
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json make_summary(const std::string& cmd, int exit_code, const std::string& status) {
  json j;
  j["command"] = cmd;
  j["exit_code"] = exit_code;
  j["status"] = status;
  j["communication_rounds"] = 0;
  j["iterations"] = 0;
  j["total_inner_iterations"] = 0;
  j["final_value"] = nullptr;
  j["reference_value"] = nullptr;
  j["final_gap"] = nullptr;
  j["certificate"] = nullptr;
  j["certified"] = false;
  j["bytes"] = 0;
  j["wall_ms"] = 0.0;
  j["seed"] = 0;
  j["config"] = json::object();
  return j;
}

json config_json(const RunConfig& c) {
  json j;
  j["data"] = c.data.empty() ? json(nullptr) : json(c.data);
  j["synthetic"] = c.data.empty() ? json(c.synthetic) : json(nullptr);
  j["workers"] = c.workers;
  j["n_precond"] = c.n_precond;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["sigma"] = c.sigma;
  j["radius"] = c.radius;
  j["m0"] = c.m0;
  j["c_rate"] = c.c_rate;
  j["rounds"] = c.rounds;
  j["target"] = c.target;
  return j;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

int cmd_gen_synthetic(const RunConfig& c, std::ostream& out) {
  SparseDataset data = load_data(c);
  std::ostringstream body;
  write_libsvm(body, data);
  write_files({{c.out, body.str()}});
  out << fmt::format("wrote {} rows, {} features to {}\n", data.size(), data.dim(), c.out);
  return kOk;
}

int cmd_check_oracles(const RunConfig& c, std::ostream& out) {
  SparseDataset data = load_data(c);
  LogRegProblem p(data, c.lambda1, c.lambda2, sparse_feature_mask(data));
  SmoothOracle f = logistic_oracle(p);
  if (c.corrupt_gradient) {
    auto g = f.grad;
    f.grad = [g](const Vec& x) { return Vec(g(x) + Vec::Constant(x.size(), 1e-3)); };
  }
  OracleErrors e = fd_oracle_errors(f, p.dim(), 10, c.seed);
  OracleTolerances tol;
  out << fmt::format("gradient       max rel err {:.3e} (tol {:.0e})\n", e.gradient, tol.gradient);
  out << fmt::format("hessian_vec    max rel err {:.3e} (tol {:.0e})\n", e.hvp, tol.hvp);
  out << fmt::format("third_bilinear max rel err {:.3e} (tol {:.0e})\n", e.third, tol.third);
  auto failed = oracle_failures(e, tol);
  if (failed.empty()) {
    out << "all oracles within tolerance\n";
    return kOk;
  }
  for (const auto& name : failed) out << "FAILED: " << name << '\n';
  return kOracleBreach;
}

int cmd_run_inspag(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const LogLevel level = log_level();
  SparseDataset data = load_data(c);

  InspagConfig cfg;
  cfg.R = c.radius;
  cfg.M0 = c.m0;
  cfg.n_precond = c.n_precond;
  cfg.sigma = c.sigma;
  cfg.lambda1 = c.lambda1;
  cfg.lambda2 = c.lambda2;
  cfg.K_max = c.rounds;
  cfg.target = c.target;
  cfg.c_rate = c.c_rate;
  cfg.seed = c.seed;
  cfg.parallel = !c.sequential;
  if (c.theta >= 0.0) {
    cfg.theta_mode = ThetaMode::user;
    cfg.theta = c.theta;
  }

  InspagDriver drv(data, cfg, c.workers);
  if (cfg.K_max > 0) {
    drv.initialize();
    while (drv.state().agm.k < cfg.K_max && !drv.certificate_met() &&
           !drv.precision_limited()) {
      size_t before = drv.records().size();
      drv.round();
      if (level == LogLevel::debug)
        for (size_t i = before; i < drv.records().size(); ++i) {
          const auto& r = drv.records()[i];
          err << fmt::format("round {:4} k {:3} trial {} M {:.3e} F {:.12e} {}\n", r.round,
                             r.k, r.trial, r.M, r.f_value, r.accepted ? "accepted" : "rejected");
        }
    }
  }

  std::vector<RoundRecord> records = drv.records();
  if (c.no_timing)
    for (auto& r : records) r.wall_ms = 0.0;
  const bool certified = drv.certificate_met();
  const int code = certified ? kOk : kNotCertified;

  std::optional<double> ref, gap;
  if (c.reference) {
    LogRegProblem full(data, c.lambda1, c.lambda2,
                       drv.setup().precond.local_problem().is_sparse());
    ref = reference_solve(full).f;
    if (!records.empty()) gap = drv.state().f_x - *ref;
  }

  const char* status = certified                  ? "certificate met"
                       : drv.precision_limited() ? "precision limit"
                                                 : "K_max reached";
  json s = make_summary("run-inspag", code, status);
  const auto& ledger = drv.objective().ledger();
  s["communication_rounds"] = ledger.rounds;
  s["iterations"] = drv.state().agm.k;
  s["total_inner_iterations"] = drv.state().inner_iters;
  if (!records.empty()) s["final_value"] = drv.state().f_x;
  s["reference_value"] = nullable(ref);
  s["final_gap"] = nullable(gap);
  double cert = drv.certificate();
  s["certificate"] = std::isfinite(cert) ? json(cert) : json(nullptr);
  s["certified"] = certified;
  s["bytes"] = ledger.bytes_up + ledger.bytes_down;
  s["wall_ms"] = c.no_timing ? 0.0 : elapsed_ms(t0);
  s["seed"] = c.seed;
  json cj = config_json(c);
  cj["R"] = drv.setup().cfg.R;
  cj["L_phi"] = drv.setup().precond.l_phi();
  cj["mu_rel"] = drv.setup().cfg.mu_rel;
  cj["kappa_phi"] = drv.setup().precond.kappa_phi();
  s["config"] = cj;

  const std::string base = output_base(c.out);
  std::ostringstream csv, lines;
  write_round_csv(csv, records);
  std::vector<std::pair<std::string, std::string>> files = {
      {c.out, csv.str()}, {base + ".summary.json", s.dump(2) + "\n"}};
  if (c.jsonl) {
    write_round_jsonl(lines, records);
    files.emplace_back(base + ".jsonl", lines.str());
  }
  write_files(files);
  if (level != LogLevel::quiet)
    out << fmt::format("run-inspag: {} after {} iterations, {} communication rounds\n",
                       status, drv.state().agm.k, ledger.rounds);
  return code;
}

struct QuarticObjective {
  // f(x) = sum_i x_i^4 / 4, minimum 0 at the origin.
  static SmoothOracle oracle(double l3) {
    SmoothOracle f;
    f.value = [](const Vec& x) { return 0.25 * x.array().pow(4).sum(); };
    f.grad = [](const Vec& x) { return Vec(x.array().pow(3)); };
    f.hvp = [](const Vec& x, const Vec& v) { return Vec(3.0 * x.array().square() * v.array()); };
    f.d3_bilinear = [](const Vec& x, const Vec& h) {
      return Vec(6.0 * x.array() * h.array().square());
    };
    f.hessian = [](const Vec& x) { return Mat(Vec(3.0 * x.array().square()).asDiagonal()); };
    f.l3 = l3;
    return f;
  }
};

int cmd_run_hyperfast(const RunConfig& c, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RestartResult res;
  std::optional<std::vector<double>> gaps;
  std::optional<double> ref;
  double f_final = 0.0;
  if (c.objective == "quartic") {
    const Index d = c.dim > 0 ? c.dim : 1;
    SmoothOracle f = QuarticObjective::oracle(c.l3 > 0.0 ? c.l3 : 6.0);
    Vec z0 = Vec::Ones(d);
    RestartScheduleUniform sched;
    sched.q = c.q;
    sched.sigma_q = c.sigma_q;
    sched.c_hat = c.c_rate;
    sched.Delta0 = f.value(z0);
    res = restart_uniformly_convex(f, sched, z0, c.target);
    ref = 0.0;
    f_final = f.value(res.z);
  } else {
    SparseDataset data = load_data(c);
    LogRegProblem p(data, c.lambda1, c.lambda2, sparse_feature_mask(data));
    SmoothOracle f = logistic_oracle(p);
    if (c.l3 > 0.0) f.l3 = c.l3;
    RestartScheduleStrong sched;
    sched.R0 = 2.0 * (c.radius > 0.0 ? c.radius : default_radius(p));
    sched.mu = smoothness_constants(p).mu_strong;
    sched.c = c.c_rate;
    res = restart_strongly_convex(f, Vec::Zero(p.dim()), sched, c.target);
    f_final = f.value(res.z);
    if (c.reference) ref = reference_solve(p).f;
  }
  if (ref) {
    gaps.emplace();
    for (const auto& e : res.log) gaps->push_back(e.value - *ref);
  }

  json s = make_summary("run-hyperfast", kOk, "target reached");
  s["iterations"] = res.restarts;
  s["total_inner_iterations"] = res.total_steps;
  s["final_value"] = f_final;
  s["reference_value"] = nullable(ref);
  if (ref) s["final_gap"] = f_final - *ref;
  s["certificate"] = res.log.empty() ? json(nullptr) : json(res.log.back().certified);
  s["certified"] = true;
  s["wall_ms"] = c.no_timing ? 0.0 : elapsed_ms(t0);
  s["seed"] = c.seed;
  json cj = config_json(c);
  cj["objective"] = c.objective;
  if (c.objective == "quartic") {
    cj["q"] = c.q;
    cj["sigma_q"] = c.sigma_q;
  }
  s["config"] = cj;

  std::ostringstream csv;
  write_restart_csv(csv, res.log, gaps);
  write_files({{c.out, csv.str()}, {output_base(c.out) + ".summary.json", s.dump(2) + "\n"}});
  if (log_level() != LogLevel::quiet)
    out << fmt::format("run-hyperfast: {} restarts, {} steps\n", res.restarts, res.total_steps);
  return kOk;
}

int cmd_run_agm(const RunConfig& c, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index d = c.dim > 0 ? c.dim : 20;
  const double mu = 1e-2, L = 1.0;
  QuadraticObjective q = random_quadratic(d, mu, L, c.seed);
  GradientModel model([&q](const Vec& x) { return q.value(x); },
                      [&q](const Vec& x) { return q.grad(x); },
                      L * Mat::Identity(d, d), mu / L);
  AgmOptions opts;
  opts.M0 = c.m0;
  auto sched = InexactnessSchedule::exact();
  AgmRun run = run_agm(Vec::Zero(d), model, sched, c.rounds, opts);
  const Vec x_star = q.minimizer();
  const double f_star = q.value(x_star);
  const double d0 = model.bregman(Vec::Zero(d), x_star);

  std::ostringstream csv;
  csv << "k,A_k,M_k,alpha_k,f_value,gap,bound\n";
  for (int k = 1; k <= c.rounds; ++k) {
    const auto& rec = run.state.history[static_cast<size_t>(k - 1)];
    double bound = agm_error_bound(run.state.history, k, d0, sched);
    csv << k << ',' << format_double(rec.A) << ',' << format_double(rec.M) << ','
        << format_double(rec.alpha) << ',' << format_double(rec.f) << ','
        << format_double(rec.f - f_star) << ',' << format_double(bound) << '\n';
  }
  json s = make_summary("run-agm", kOk, "completed");
  s["iterations"] = c.rounds;
  if (c.rounds > 0) {
    s["final_value"] = run.state.history.back().f;
    s["final_gap"] = run.state.history.back().f - f_star;
    s["certificate"] = agm_error_bound(run.state.history, c.rounds, d0, sched);
  }
  s["reference_value"] = f_star;
  s["wall_ms"] = c.no_timing ? 0.0 : elapsed_ms(t0);
  s["seed"] = c.seed;
  json cj;
  cj["dim"] = d;
  cj["mu"] = mu;
  cj["L"] = L;
  cj["m0"] = c.m0;
  cj["rounds"] = c.rounds;
  s["config"] = cj;
  write_files({{c.out, csv.str()}, {output_base(c.out) + ".summary.json", s.dump(2) + "\n"}});
  if (log_level() != LogLevel::quiet)
    out << fmt::format("run-agm: {} iterations\n", c.rounds);
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"InSPAG distributed logistic regression and tensor-method experiments"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  RunConfig c;

  app.add_option("--data", c.data, "LibSVM dataset path");
  app.add_option("--synthetic", c.synthetic, "Synthetic dataset N,d,density")
      ->capture_default_str();
  app.add_option("--workers", c.workers, "Simulated workers m")->capture_default_str();
  app.add_option("--n-precond", c.n_precond, "Preconditioner sample size n")->capture_default_str();
  app.add_option("--lambda1", c.lambda1, "Ridge weight on sparse features")->capture_default_str();
  app.add_option("--lambda2", c.lambda2, "Ridge weight on dense features")->capture_default_str();
  app.add_option("--sigma", c.sigma, "Preconditioner ridge sigma")->capture_default_str();
  app.add_option("--radius", c.radius, "Ball radius R (0: 10x a warm start norm)")
      ->capture_default_str();
  app.add_option("--m0", c.m0, "Initial M")->capture_default_str();
  app.add_option("--c-rate", c.c_rate, "Restart constant c")->capture_default_str();
  app.add_option("--rounds", c.rounds, "Outer iterations K_max")->capture_default_str();
  app.add_option("--target", c.target, "Certificate / gap target")->capture_default_str();
  app.add_option("--seed", c.seed, "Seed for data and partition")->capture_default_str();
  app.add_option("--out", c.out, "Output path (CSV, or LibSVM for gen-synthetic)");
  app.add_flag("--no-timing", c.no_timing, "Write wall_ms as 0 for byte-stable output");
  app.add_flag("--jsonl", c.jsonl, "Also write per-round JSON lines");
  app.add_flag("--reference", c.reference, "Newton reference solve for the final gap");
  app.add_flag("--sequential", c.sequential, "Run worker tasks on one thread");
  app.add_option("--theta", c.theta, "Fixed theta (default: online estimate)");
  app.add_option("--objective", c.objective, "run-hyperfast: logistic or quartic")
      ->capture_default_str();
  app.add_option("--q", c.q, "Uniform convexity degree")->capture_default_str();
  app.add_option("--sigma-q", c.sigma_q, "Uniform convexity constant")->capture_default_str();
  app.add_option("--l3", c.l3, "Override the third-derivative constant");
  app.add_option("--dim", c.dim, "Dimension of built-in objectives");
  app.add_flag("--corrupt-gradient", c.corrupt_gradient)->group("");

  std::vector<std::pair<std::string, std::string>> commands = {
      {"run-inspag", "Run InSPAG on a partitioned dataset"},
      {"run-hyperfast", "Run a restarted tensor method standalone"},
      {"run-agm", "Run the adaptive accelerated method on a quadratic"},
      {"check-oracles", "Finite-difference checks of the logistic oracles"},
      {"gen-synthetic", "Write a synthetic dataset in LibSVM format"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  auto problems = validate(c, cmd);
  if (!problems.empty()) {
    err << "invalid configuration:\n";
    for (const auto& p : problems) err << "  - " << p << '\n';
    return kInputError;
  }

  try {
    if (cmd == "gen-synthetic") return cmd_gen_synthetic(c, out);
    if (cmd == "check-oracles") return cmd_check_oracles(c, out);
    if (cmd == "run-inspag") return cmd_run_inspag(c, out, err);
    if (cmd == "run-hyperfast") return cmd_run_hyperfast(c, out);
    if (cmd == "run-agm") return cmd_run_agm(c, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const WorkerError& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return kInputError;
}

}  // namespace inspag::cli
