#pragma once

#include <functional>
#include <vector>

#include "inspag/sparse_dataset.hpp"

namespace inspag {

// Phi(x) = alpha * psi(x, anchor) + weight_u * D[prox_center](x)
//          + weight_y * D[anchor](x)
struct ProjectionTask {
  double alpha = 0.0;
  Vec anchor;       // y_{k+1}
  Vec prox_center;  // u_k
  double weight_u = 1.0;
  double weight_y = 0.0;
};

// Inexact (delta, L, mu, m, phi)-model of f.
class ModelOracle {
 public:
  virtual ~ModelOracle() = default;
  virtual double f_delta(const Vec& y) const = 0;
  virtual double psi_delta(const Vec& x, const Vec& y) const = 0;
  virtual double bregman(const Vec& u, const Vec& x) const = 0;
  // Point whose inexact-projection certificate holds at delta_tilde.
  virtual Vec project(const ProjectionTask& task, double delta_tilde) const = 0;
  virtual double mu() const = 0;
  virtual double m() const { return 0.0; }
};

struct AgmRecord {
  int k = 0;  // index of the produced iterate
  double A = 0.0;
  double M = 0.0;
  double alpha = 0.0;
  double f = 0.0;  // f_delta(x_k)
  int trials = 0;
};

struct AgmState {
  int k = 0;
  double A = 0.0;
  double M = 1.0;
  Vec x, y, u;
  std::vector<AgmRecord> history;
};

AgmState agm_init(const Vec& x0, double M0 = 1.0);

struct InexactnessSchedule {
  std::function<double(int)> delta = [](int) { return 0.0; };
  std::function<double(int)> delta_tilde = [](int) { return 0.0; };

  static InexactnessSchedule exact() { return {}; }
  static InexactnessSchedule constant(double delta, double delta_tilde);
};

struct AgmOptions {
  // Doubling beyond M_cap_factor * M0 signals wrong model constants.
  double M_cap_factor = 1152921504606846976.0;  // 2^60
  double M0 = 1.0;
};

// Largest root of M a^2 - (1 + A(mu+m)) a - A (1 + A(mu+m)) = 0.
double solve_alpha(double A_k, double mu, double m, double M_next);

AgmState agm_step(const AgmState& state, const ModelOracle& oracle,
                  const InexactnessSchedule& schedule,
                  const AgmOptions& opts = {});

struct AgmIterate {
  int k = 0;
  double A = 0.0;
  double M = 0.0;
  double alpha = 0.0;
  Vec x, y, u;
};

struct AgmRun {
  AgmState state;
  std::vector<AgmIterate> trajectory;  // iterates 1..K
};

AgmRun run_agm(const Vec& x0, const ModelOracle& oracle,
               const InexactnessSchedule& schedule, int K,
               const AgmOptions& opts = {});

// max{ N^2 / (4 Mt), (1/M_1) exp(N sqrt((mu+m)/(4 Mt))) },
// Mt^{-1/2} = mean of M_{k+1}^{-1/2} over the first N entries.
double a_lower_bound(const std::vector<double>& M_seq, double mu, double m,
                     int N);
// max{ (1/4)(sum M^{-1/2})^2, (1/M_1) prod_{k=1}^{N-1} (1 + sqrt((mu+m)/(4 M_{k+1})))^2 }
double a_lower_bound_product(const std::vector<double>& M_seq, double mu,
                             double m, int N);

// [D_phi[u0](x*) + 2 sum_{k<N} A_{k+1} delta_k + sum_{k<N} delta~_k] / A_N
double agm_error_bound(const std::vector<AgmRecord>& history, int N, double d0,
                      const InexactnessSchedule& schedule);

}  // namespace inspag
