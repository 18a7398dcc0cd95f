#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "inspag/agm.hpp"
#include "inspag/bregman.hpp"
#include "inspag/distsim.hpp"
#include "inspag/hyperfast.hpp"

namespace inspag {

enum class ThetaMode { user, online };

struct InspagConfig {
  double R = 0.0;         // 0: default_radius
  double R_phi_sq = 0.0;  // 0: 2 L_phi R^2
  double mu_rel = 0.0;    // 0: from relative_constants(mu_F, sigma)
  double M0 = 1.0;
  Index n_precond = 500;
  double sigma = 1e-3;
  double lambda1 = 1e-3;  // features in I_S
  double lambda2 = 1e-3;  // features in I_D
  double sparse_threshold = 0.1;
  int K_max = 100;
  double target = 0.0;  // stop once 2 L_phi R^2 (1 + ln K) / A_K <= target; 0 disables
  ThetaMode theta_mode = ThetaMode::online;
  double theta = 0.0;   // used in user mode
  double crit_slack = 1e-12;  // relative to |F(y_{k+1})|
  double M_cap_factor = 1099511627776.0;  // 2^40
  double c_rate = 48.0;                   // restart constant of the subsolver
  HyperfastConfig inner;
  std::uint64_t seed = 0;
  bool parallel = true;
};

// Psi(x) = <linear_term, x> + phi_scale * phi(x)
struct PsiProblem {
  Vec linear_term;
  double phi_scale = 1.0;
  const Preconditioner* precond = nullptr;

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
  double mu() const { return phi_scale * precond->mu_phi(); }
  double L() const { return phi_scale * precond->l_phi(); }
  double l3() const { return phi_scale * precond->l3_phi(); }
  SmoothOracle oracle() const;
};

PsiProblem build_psi(double alpha_next, const Vec& grad_F_y, double A_k,
                     double mu_rel, const Preconditioner& p, const Vec& u_k,
                     const Vec& y_next);

// Running max of ||grad F|| / mu_rel and ||grad phi||, times 2.
class ThetaEstimator {
 public:
  explicit ThetaEstimator(ThetaMode mode = ThetaMode::online, double user_theta = 0.0);
  void observe(double grad_F_norm, double grad_phi_norm, double mu_rel);
  double value() const;
  ThetaMode mode() const { return mode_; }

 private:
  ThetaMode mode_;
  double user_theta_;
  double running_ = 0.0;
  bool seen_ = false;
};

struct ThetaObservation {
  double grad_F_norm = 0.0;
  double grad_phi_norm = 0.0;
};

double theta_estimate(ThetaMode mode, const std::vector<ThetaObservation>& observed,
                      double mu_rel, double user_theta = 0.0);

// F on a partitioned dataset: each evaluation is one aggregation round
// returning (F, grad F).
class DistributedObjective {
 public:
  DistributedObjective(const SparseDataset& data, double lambda_sparse,
                       double lambda_dense, std::vector<char> is_sparse, Index m,
                       std::uint64_t seed, bool parallel = true);

  double evaluate(const Vec& x, Vec& grad);
  Vec aggregate_gradient(const Vec& x);

  const WorkerPool& pool() const { return pool_; }
  const CommLedger& ledger() const { return ledger_; }
  const LogRegProblem& shard(Index j) const { return shards_[j]; }
  Index dim() const { return dim_; }

  // Set by tests to make one worker fail.
  std::optional<Index> fail_worker;

 private:
  WorkerPool pool_;
  std::vector<LogRegProblem> shards_;
  CommLedger ledger_;
  Index dim_ = 0;
};

struct RoundRecord {
  long round = 0;  // communication rounds so far
  int trial = 0;
  int k = 0;       // accepted outer iterations so far
  double A = 0.0;
  double M = 0.0;
  double alpha = 0.0;
  double f_value = 0.0;    // F at the current accepted x
  double grad_norm = 0.0;  // ||grad F|| there
  long inner_iters = 0;
  double delta_k_tol = 0.0;
  long bytes = 0;
  double wall_ms = 0.0;
  // Not serialized to CSV.
  bool accepted = false;
  double projection_slack = 0.0;  // hand-off certificate minus (-delta~); >= 0 passes
  bool in_ball = true;
};

struct InspagSetup {
  InspagConfig cfg;  // with R, R_phi_sq, mu_rel resolved
  Preconditioner precond;
  RelativeConstants rel;
  SmoothnessConstants F_constants;
};

// Preconditioner rows: the first n rows of the partition's shuffled order.
InspagSetup make_setup(const SparseDataset& data, const InspagConfig& cfg);

// 10 * ||x_100|| for 100 gradient steps (step 1/L) on the central node's
// local problem; 1 if that is zero.
double default_radius(const LogRegProblem& local);

struct InspagState {
  AgmState agm;
  double f_x = 0.0;
  Vec grad_x;
  long inner_iters = 0;
};

class InspagDriver {
 public:
  InspagDriver(const SparseDataset& data, const InspagConfig& cfg, Index m);

  // One aggregation round at x0 = 0.
  void initialize();
  // One accepted outer iteration; appends one record per trial. Does nothing
  // once precision_limited() is set.
  void round();
  bool certificate_met() const;
  double certificate() const;
  // Set when the next auxiliary problem is too badly scaled for its hand-off
  // certificate to be checked in double precision.
  bool precision_limited() const { return precision_limited_; }

  const InspagSetup& setup() const { return setup_; }
  const InspagState& state() const { return state_; }
  const std::vector<RoundRecord>& records() const { return records_; }
  const std::vector<Vec>& trajectory() const { return trajectory_; }
  DistributedObjective& objective() { return obj_; }
  const ThetaEstimator& theta() const { return theta_; }

 private:
  InspagSetup setup_;
  DistributedObjective obj_;
  ThetaEstimator theta_;
  InspagState state_;
  std::vector<RoundRecord> records_;
  std::vector<Vec> trajectory_;  // x_0, x_1, ...
  double wall_start_ms_ = 0.0;
  double l3_hint_ = 0.0;  // last accepted l3 estimate divided by phi_scale
  bool precision_limited_ = false;
};

struct InspagResult {
  InspagSetup setup;
  AgmState state;
  std::vector<Vec> trajectory;
  std::vector<RoundRecord> records;
  CommLedger ledger;
  bool certified = false;
  bool precision_limited = false;
  long inner_iters = 0;
};

// Runs until K_max accepted iterations, the certificate meets cfg.target, or
// the precision limit.
InspagResult run_inspag(const InspagConfig& cfg, const SparseDataset& data,
                        Index m_workers);

}  // namespace inspag
