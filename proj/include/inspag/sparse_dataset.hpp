#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace inspag {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Feature rows xi_i (N x d) and labels eta_i in {-1,+1}.
// The constructor checks: sorted, unique column indices per row, finite
// nonzero values, labels exactly +-1.
class SparseDataset {
 public:
  SparseDataset() = default;
  SparseDataset(SparseRows features, Vec labels);

  Index size() const { return features_.rows(); }
  Index dim() const { return features_.cols(); }
  const SparseRows& features() const { return features_; }
  const Vec& labels() const { return labels_; }

  SparseDataset subset(const std::vector<Index>& rows) const;

  // Fraction of rows in which each feature is stored.
  Vec column_density() const;

 private:
  SparseRows features_;
  Vec labels_;
};

// Build from per-row (index, value) lists; indices 0-based.
SparseDataset make_dataset(
    Index dim, const std::vector<std::vector<std::pair<Index, double>>>& rows,
    const std::vector<double>& labels);

// LibSVM text: "label idx:val idx:val ...", 1-based indices, '#' lines
// skipped, labels 0 mapped to -1. dim = 0 infers the dimension from the
// largest index. Malformed input throws InputError naming the line.
SparseDataset read_libsvm(std::istream& in, Index dim = 0);
SparseDataset read_libsvm_file(const std::string& path, Index dim = 0);
void write_libsvm(std::ostream& out, const SparseDataset& data);

// Each coordinate is present with probability `density` (at least one per
// row), values N(0,1) scaled so that E||xi||^2 = 1. Labels follow a planted
// separator w with P(eta = +1) = sigmoid(<w, xi>).
SparseDataset generate_synthetic(std::uint64_t seed, Index n, Index d,
                                 double density);

}  // namespace inspag
