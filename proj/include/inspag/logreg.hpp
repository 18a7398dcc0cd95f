#pragma once

#include <vector>

#include "inspag/sparse_dataset.hpp"

namespace inspag {

// F(x) = (1/N) sum_i log(1 + exp(-eta_i <x, xi_i>))
//        + lambda_sparse * sum_{j in I_S} x_j^2 + lambda_dense * sum_{j in I_D} x_j^2
// An empty dataset contributes zero data term.
class LogRegProblem {
 public:
  LogRegProblem() = default;
  // is_sparse[j] != 0 puts feature j in I_S; empty mask means I_D = all.
  LogRegProblem(SparseDataset data, double lambda_sparse, double lambda_dense,
                std::vector<char> is_sparse = {});

  const SparseDataset& data() const { return data_; }
  Index dim() const { return data_.dim(); }
  double lambda_sparse() const { return lambda_sparse_; }
  double lambda_dense() const { return lambda_dense_; }
  const std::vector<char>& is_sparse() const { return is_sparse_; }
  std::vector<Index> sparse_idx() const;
  std::vector<Index> dense_idx() const;
  // Diagonal of the regularizer Hessian: 2*lambda_j.
  const Vec& reg_diag() const { return reg_diag_; }

 private:
  SparseDataset data_;
  double lambda_sparse_ = 0.0;
  double lambda_dense_ = 0.0;
  std::vector<char> is_sparse_;
  Vec reg_diag_;
};

// Features stored in at most `max_fraction` of rows go to I_S.
std::vector<char> sparse_feature_mask(const SparseDataset& data,
                                      double max_fraction = 0.1);

struct SmoothnessConstants {
  double l_smooth = 0.0;   // L_F
  double mu_strong = 0.0;  // mu_F
  double l3 = 0.0;         // third-derivative Lipschitz constant
};

double loss_value(const LogRegProblem& p, const Vec& x);
Vec gradient(const LogRegProblem& p, const Vec& x);
// Value and gradient from one pass over the data.
double value_and_gradient(const LogRegProblem& p, const Vec& x, Vec& grad);
Vec hessian_vec(const LogRegProblem& p, const Vec& x, const Vec& v);
Mat hessian_dense(const LogRegProblem& p, const Vec& x);
// D^3 F(x)[h, h] as a vector.
Vec third_deriv_bilinear(const LogRegProblem& p, const Vec& x, const Vec& h);

SmoothnessConstants smoothness_constants(const LogRegProblem& p);
// Largest eigenvalue of A^T A by power iteration (fixed start vector).
double gram_spectral_norm(const SparseRows& a, double rel_tol = 1e-6,
                          int max_iter = 10000);

// Stable scalar pieces, exposed for tests.
double softplus(double z);  // log(1 + e^z)
double sigmoid(double t);

}  // namespace inspag
