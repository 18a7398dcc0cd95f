#include "inspag/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// s(t) = sigma(t) sigma(-t), the second derivative of log(1 + e^-t).
double sigmoid_prime(double t) {
  double a = std::abs(t);
  double e = std::exp(-a);
  return e / ((1.0 + e) * (1.0 + e));
}

// d/dt of sigmoid_prime: s(t) (1 - 2 sigma(t)).
double sigmoid_second(double t) {
  return sigmoid_prime(t) * (sigmoid(-t) - sigmoid(t));
}

void check_dim(const LogRegProblem& p, const Vec& x, const char* what) {
  if (x.size() != p.dim())
    throw InputError(fmt::format("{}: expected length {}, got {}", what,
                                 p.dim(), x.size()));
}

Vec margins(const LogRegProblem& p, const Vec& x) {
  return (p.data().features() * x).cwiseProduct(p.data().labels());
}

}  // namespace

LogRegProblem::LogRegProblem(SparseDataset data, double lambda_sparse,
                             double lambda_dense, std::vector<char> is_sparse)
    : data_(std::move(data)),
      lambda_sparse_(lambda_sparse),
      lambda_dense_(lambda_dense),
      is_sparse_(std::move(is_sparse)) {
  if (!(lambda_sparse >= 0.0) || !(lambda_dense >= 0.0))
    throw InputError("regularization weights must be nonnegative");
  if (is_sparse_.empty()) is_sparse_.assign(static_cast<std::size_t>(dim()), 0);
  if (static_cast<Index>(is_sparse_.size()) != dim())
    throw InputError("sparse feature mask has wrong length");
  reg_diag_.resize(dim());
  for (Index j = 0; j < dim(); ++j)
    reg_diag_[j] = 2.0 * (is_sparse_[static_cast<std::size_t>(j)] ? lambda_sparse_
                                                                   : lambda_dense_);
}

std::vector<Index> LogRegProblem::sparse_idx() const {
  std::vector<Index> out;
  for (Index j = 0; j < dim(); ++j)
    if (is_sparse_[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

std::vector<Index> LogRegProblem::dense_idx() const {
  std::vector<Index> out;
  for (Index j = 0; j < dim(); ++j)
    if (!is_sparse_[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

std::vector<char> sparse_feature_mask(const SparseDataset& data,
                                      double max_fraction) {
  Vec dens = data.column_density();
  std::vector<char> mask(static_cast<std::size_t>(data.dim()));
  for (Index j = 0; j < data.dim(); ++j)
    mask[static_cast<std::size_t>(j)] = dens[j] <= max_fraction ? 1 : 0;
  return mask;
}

double loss_value(const LogRegProblem& p, const Vec& x) {
  check_dim(p, x, "loss_value");
  double reg = 0.5 * x.cwiseProduct(x).dot(p.reg_diag());
  Index n = p.data().size();
  if (n == 0) return reg;
  Vec t = margins(p, x);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) sum += softplus(-t[i]);
  return sum / static_cast<double>(n) + reg;
}

double value_and_gradient(const LogRegProblem& p, const Vec& x, Vec& grad) {
  check_dim(p, x, "value_and_gradient");
  grad = p.reg_diag().cwiseProduct(x);
  double value = 0.5 * x.cwiseProduct(x).dot(p.reg_diag());
  Index n = p.data().size();
  if (n == 0) return value;
  Vec t = margins(p, x);
  Vec w(n);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    sum += softplus(-t[i]);
    w[i] = -p.data().labels()[i] * sigmoid(-t[i]);
  }
  double inv_n = 1.0 / static_cast<double>(n);
  grad.noalias() += inv_n * (p.data().features().transpose() * w);
  return value + sum * inv_n;
}

Vec gradient(const LogRegProblem& p, const Vec& x) {
  Vec g;
  value_and_gradient(p, x, g);
  return g;
}

Vec hessian_vec(const LogRegProblem& p, const Vec& x, const Vec& v) {
  check_dim(p, x, "hessian_vec");
  check_dim(p, v, "hessian_vec");
  Vec out = p.reg_diag().cwiseProduct(v);
  Index n = p.data().size();
  if (n == 0) return out;
  Vec t = margins(p, x);
  Vec av = p.data().features() * v;
  for (Index i = 0; i < n; ++i) av[i] *= sigmoid_prime(t[i]);
  out.noalias() += (1.0 / static_cast<double>(n)) * (p.data().features().transpose() * av);
  return out;
}

Mat hessian_dense(const LogRegProblem& p, const Vec& x) {
  check_dim(p, x, "hessian_dense");
  Mat h = Mat::Zero(p.dim(), p.dim());
  Index n = p.data().size();
  if (n > 0) {
    Vec t = margins(p, x);
    const SparseRows& a = p.data().features();
    for (Index i = 0; i < n; ++i) {
      double s = sigmoid_prime(t[i]);
      for (SparseRows::InnerIterator r(a, i); r; ++r)
        for (SparseRows::InnerIterator c(a, i); c; ++c)
          h(r.col(), c.col()) += s * r.value() * c.value();
    }
    h /= static_cast<double>(n);
  }
  h.diagonal() += p.reg_diag();
  return h;
}

Vec third_deriv_bilinear(const LogRegProblem& p, const Vec& x, const Vec& h) {
  check_dim(p, x, "third_deriv_bilinear");
  check_dim(p, h, "third_deriv_bilinear");
  Index n = p.data().size();
  if (n == 0) return Vec::Zero(p.dim());
  Vec t = margins(p, x);
  Vec ah = p.data().features() * h;
  for (Index i = 0; i < n; ++i)
    ah[i] = sigmoid_second(t[i]) * p.data().labels()[i] * ah[i] * ah[i];
  return (1.0 / static_cast<double>(n)) * (p.data().features().transpose() * ah);
}

double gram_spectral_norm(const SparseRows& a, double rel_tol, int max_iter) {
  std::mt19937_64 rng(20240607);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(a.cols());
  for (Index j = 0; j < v.size(); ++j) v[j] = gauss(rng);
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = a.transpose() * (a * v);
    double next = v.dot(w);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 0 && std::abs(next - lam) <= rel_tol * std::abs(next)) return next;
    lam = next;
  }
  return lam;
}

SmoothnessConstants smoothness_constants(const LogRegProblem& p) {
  Index n = p.data().size();
  if (n == 0) throw InputError("smoothness constants need a nonempty dataset");
  const SparseRows& a = p.data().features();
  double sq = 0.0;
  for (Index i = 0; i < n; ++i) sq += a.row(i).squaredNorm();
  SmoothnessConstants c;
  c.l_smooth = std::max(p.lambda_sparse(), p.lambda_dense()) + sq / static_cast<double>(n);
  c.mu_strong = std::min(p.lambda_sparse(), p.lambda_dense());
  double g = gram_spectral_norm(a);
  c.l3 = 15.0 * g * g;
  return c;
}

}  // namespace inspag
