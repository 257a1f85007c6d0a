#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdna/dataset.hpp"
#include "pdna/error.hpp"

namespace pdna {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Ternary vote matrix: +1 Yes, -1 No, 0 not voting. Rows are voters.
struct EncodedMatrix {
  Eigen::MatrixXi values;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  EncodedMatrix transposed() const { return {values.transpose(), col_ids, row_ids}; }
};

EncodedMatrix encode(const VoteDataset& d);

template <typename Scalar>
struct ColumnStats {
  Vector<Scalar> means;
  Vector<Scalar> norms;  // root sum of squared deviations, always > 0
};

/// Centers each column and divides by the root of its sum of squared
/// deviations, so columns have zero mean and unit Euclidean norm (not unit
/// sample variance). Summation runs top to bottom in every column.
template <typename Derived>
auto column_stats(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  ColumnStats<Scalar> stats{Vector<Scalar>(z.cols()), Vector<Scalar>(z.cols())};
  const Eigen::Index m = z.rows();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    Scalar sum(0);
    for (Eigen::Index i = 0; i < m; ++i) sum += z(i, j);
    const Scalar mean = sum / Scalar(m);
    Scalar ss(0);
    for (Eigen::Index i = 0; i < m; ++i) ss += (z(i, j) - mean) * (z(i, j) - mean);
    stats.means(j) = mean;
    stats.norms(j) = std::sqrt(ss);
  }
  return stats;
}

/// Applies stored statistics; used for both the training rows and held-out
/// voters.
template <typename Derived, typename Scalar>
Matrix<Scalar> apply_column_stats(const Eigen::MatrixBase<Derived>& z, const ColumnStats<Scalar>& stats) {
  if (z.cols() != stats.means.size())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(z.cols()) + " columns, statistics have " +
                                                  std::to_string(stats.means.size()));
  Matrix<Scalar> x = z.template cast<Scalar>();
  x.rowwise() -= stats.means.transpose();
  x.array().rowwise() /= stats.norms.transpose().array();
  return x;
}

template <typename Scalar>
Eigen::Index first_constant_column(const ColumnStats<Scalar>& stats) {
  for (Eigen::Index j = 0; j < stats.norms.size(); ++j)
    if (!(stats.norms(j) > Scalar(0))) return j;
  return -1;
}

/// Throws ZeroVarianceColumn when a column is constant.
template <typename Derived>
auto standardize_columns(const Eigen::MatrixBase<Derived>& z, ColumnStats<typename Derived::Scalar>* stats_out = nullptr) {
  using Scalar = typename Derived::Scalar;
  auto stats = column_stats(z);
  if (const auto j = first_constant_column(stats); j >= 0)
    throw Error(ErrorCode::ZeroVarianceColumn, "column " + std::to_string(j) + " is constant");
  Matrix<Scalar> x = apply_column_stats(z, stats);
  if (stats_out) *stats_out = std::move(stats);
  return x;
}

template <typename Scalar>
struct Standardized {
  Matrix<Scalar> values;
  ColumnStats<Scalar> stats;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

using StandardizedMatrix = Standardized<double>;

template <typename Scalar = double>
Standardized<Scalar> standardize(const EncodedMatrix& z) {
  Standardized<Scalar> out;
  const Matrix<Scalar> zs = z.values.cast<Scalar>();
  out.stats = column_stats(zs);
  if (const auto j = first_constant_column(out.stats); j >= 0)
    throw Error(ErrorCode::ZeroVarianceColumn, "column '" + z.col_ids.at(static_cast<std::size_t>(j)) + "' is constant");
  out.values = apply_column_stats(zs, out.stats);
  out.row_ids = z.row_ids;
  out.col_ids = z.col_ids;
  return out;
}

/// CSV with a header row of column ids and the row id in the first column,
/// values at 12 significant digits.
std::string standardized_csv(const StandardizedMatrix& x);

}  // namespace pdna
