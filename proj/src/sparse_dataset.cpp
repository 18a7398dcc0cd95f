#include "inspag/sparse_dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

SparseDataset::SparseDataset(SparseRows features, Vec labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size())
    throw InputError(fmt::format("dataset has {} rows but {} labels",
                                 features_.rows(), labels_.size()));
  features_.makeCompressed();
  for (Index i = 0; i < features_.rows(); ++i) {
    Index prev = -1;
    for (SparseRows::InnerIterator it(features_, i); it; ++it) {
      if (it.col() <= prev)
        throw InputError(fmt::format("row {}: duplicate or unsorted index {}",
                                     i, it.col()));
      if (!std::isfinite(it.value()) || it.value() == 0.0)
        throw InputError(
            fmt::format("row {}: stored value must be finite and nonzero", i));
      prev = it.col();
    }
    if (labels_[i] != 1.0 && labels_[i] != -1.0)
      throw InputError(fmt::format("row {}: label must be +1 or -1", i));
  }
}

SparseDataset SparseDataset::subset(const std::vector<Index>& rows) const {
  std::vector<Eigen::Triplet<double>> trip;
  Vec lab(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index i = rows[r];
    if (i < 0 || i >= size()) throw InputError("subset row out of range");
    for (SparseRows::InnerIterator it(features_, i); it; ++it)
      trip.emplace_back(static_cast<Index>(r), it.col(), it.value());
    lab[static_cast<Index>(r)] = labels_[i];
  }
  SparseRows f(static_cast<Index>(rows.size()), dim());
  f.setFromTriplets(trip.begin(), trip.end());
  return SparseDataset(std::move(f), std::move(lab));
}

Vec SparseDataset::column_density() const {
  Vec count = Vec::Zero(dim());
  for (Index i = 0; i < size(); ++i)
    for (SparseRows::InnerIterator it(features_, i); it; ++it)
      count[it.col()] += 1.0;
  if (size() > 0) count /= static_cast<double>(size());
  return count;
}

SparseDataset make_dataset(
    Index dim, const std::vector<std::vector<std::pair<Index, double>>>& rows,
    const std::vector<double>& labels) {
  if (rows.size() != labels.size())
    throw InputError("rows and labels differ in length");
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto sorted = rows[r];
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      auto [c, v] = sorted[j];
      if (c < 0 || c >= dim)
        throw InputError(fmt::format("row {}: index {} outside [0,{})", r, c, dim));
      if (j > 0 && sorted[j - 1].first == c)
        throw InputError(fmt::format("row {}: duplicate index {}", r, c));
      if (!std::isfinite(v) || v == 0.0)
        throw InputError(fmt::format("row {}: value must be finite and nonzero", r));
      trip.emplace_back(static_cast<Index>(r), c, v);
    }
  }
  SparseRows f(static_cast<Index>(rows.size()), dim);
  f.setFromTriplets(trip.begin(), trip.end());
  Vec lab = Eigen::Map<const Vec>(labels.data(), static_cast<Index>(labels.size()));
  return SparseDataset(std::move(f), std::move(lab));
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  // from_chars rejects a leading '+'.
  if (tok.size() > 1 && tok[0] == '+' && tok[1] != '-') tok.remove_prefix(1);
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

bool parse_index(std::string_view tok, long long& out) {
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

}  // namespace

SparseDataset read_libsvm(std::istream& in, Index dim) {
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> labels;
  Index max_index = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string& why) {
      return InputError(fmt::format("libsvm line {}: {}", line_no, why));
    };
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line.substr(first));
    std::string tok;
    ls >> tok;
    double label = 0.0;
    if (!parse_double(tok, label)) throw fail("bad label '" + tok + "'");
    if (label == 1.0) {
      labels.push_back(1.0);
    } else if (label == -1.0 || label == 0.0) {
      labels.push_back(-1.0);
    } else {
      throw fail("label must be one of -1, 0, +1");
    }
    std::vector<std::pair<Index, double>> row;
    while (ls >> tok) {
      if (tok[0] == '#') break;
      auto colon = tok.find(':');
      if (colon == std::string::npos) throw fail("expected idx:val, got '" + tok + "'");
      long long idx = 0;
      double val = 0.0;
      if (!parse_index(std::string_view(tok).substr(0, colon), idx) || idx < 1)
        throw fail("bad index in '" + tok + "'");
      if (!parse_double(std::string_view(tok).substr(colon + 1), val) ||
          !std::isfinite(val))
        throw fail("bad value in '" + tok + "'");
      if (dim > 0 && idx > dim)
        throw fail(fmt::format("index {} exceeds dimension {}", idx, dim));
      if (val == 0.0) continue;
      row.emplace_back(static_cast<Index>(idx - 1), val);
      max_index = std::max<Index>(max_index, static_cast<Index>(idx));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j].first == row[j - 1].first)
        throw fail(fmt::format("duplicate index {}", row[j].first + 1));
    rows.push_back(std::move(row));
  }
  return make_dataset(dim > 0 ? dim : max_index, rows, labels);
}

SparseDataset read_libsvm_file(const std::string& path, Index dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path + "'");
  return read_libsvm(in, dim);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  for (Index i = 0; i < data.size(); ++i) {
    out << (data.labels()[i] > 0 ? "+1" : "-1");
    for (SparseRows::InnerIterator it(data.features(), i); it; ++it)
      out << fmt::format(" {}:{:.17g}", it.col() + 1, it.value());
    out << '\n';
  }
}

SparseDataset generate_synthetic(std::uint64_t seed, Index n, Index d,
                                 double density) {
  if (n <= 0 || d <= 0) throw InputError("synthetic dataset needs N > 0 and d > 0");
  if (!(density > 0.0 && density <= 1.0))
    throw InputError("synthetic density must lie in (0,1]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, d - 1);

  // Margin <w, xi> has standard deviation about 2.
  Vec w(d);
  for (Index j = 0; j < d; ++j) w[j] = 2.0 * gauss(rng);
  const double scale = 1.0 / std::sqrt(density * static_cast<double>(d));

  std::vector<Eigen::Triplet<double>> trip;
  Vec labels(n);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> cols;
    for (Index j = 0; j < d; ++j)
      if (density >= 1.0 || unif(rng) < density) cols.push_back(j);
    if (cols.empty()) cols.push_back(pick(rng));
    double margin = 0.0;
    for (Index j : cols) {
      double v = gauss(rng) * scale;
      if (v == 0.0) v = scale;
      trip.emplace_back(i, j, v);
      margin += w[j] * v;
    }
    double p = 1.0 / (1.0 + std::exp(-margin));
    labels[i] = unif(rng) < p ? 1.0 : -1.0;
  }
  SparseRows f(n, d);
  f.setFromTriplets(trip.begin(), trip.end());
  return SparseDataset(std::move(f), std::move(labels));
}

}  // namespace inspag
