#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pdna/error.hpp"
#include "pdna/preprocess.hpp"

namespace pdna {

enum class BasisKind { Dense, Sparse };

/// Ordered principal directions (columns of `directions`, one per component)
/// with the singular value attached to each. Sparse bases also record the
/// sparsity budget p.
template <typename Scalar>
struct ComponentBasis {
  Matrix<Scalar> directions;
  Vector<Scalar> singular_values;
  BasisKind kind = BasisKind::Dense;
  Eigen::Index sparsity = 0;

  Eigen::Index dim() const { return directions.rows(); }
  Eigen::Index size() const { return directions.cols(); }
};

template <typename Scalar>
struct ProjectedData {
  Matrix<Scalar> values;  // m x k
  ComponentBasis<Scalar> basis;
  std::vector<std::string> row_ids;
};

/// Flips v so that its largest-magnitude entry is positive, ties going to the
/// lowest index. Returns true when v was negated.
template <typename Derived>
bool orient(Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  if (v.size() > 0 && v(best) < 0) {
    v = -v;
    return true;
  }
  return false;
}

inline constexpr double kRankTolerance = 1e-10;

/// Top-k right singular vectors of x. Throws KTooLarge / RankDeficient.
template <typename Derived>
ComponentBasis<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& x, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index limit = std::min(x.rows(), x.cols());
  if (k < 1 || k > limit)
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " outside [1, min(m,n)=" + std::to_string(limit) + "]");

  const Matrix<Scalar> dense = x;
  Eigen::BDCSVD<Matrix<Scalar>> svd(dense, Eigen::ComputeThinV);
  const Vector<Scalar>& sv = svd.singularValues();
  const Scalar tol = Scalar(kRankTolerance) * sv(0);
  if (!(sv(0) > Scalar(0)) || sv(k - 1) < tol) {
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > Scalar(0) && sv(rank) >= tol) ++rank;
    throw Error(ErrorCode::RankDeficient,
                "k=" + std::to_string(k) + " exceeds numerical rank " + std::to_string(rank));
  }

  ComponentBasis<Scalar> basis;
  basis.kind = BasisKind::Dense;
  basis.directions = svd.matrixV().leftCols(k);
  basis.singular_values = sv.head(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    auto col = basis.directions.col(c);
    orient(col);
  }
  return basis;
}

template <typename Scalar>
ComponentBasis<Scalar> pca_fit(const Standardized<Scalar>& x, Eigen::Index k) {
  return pca_fit(x.values, k);
}

template <typename Derived, typename Scalar>
Matrix<Scalar> project(const Eigen::MatrixBase<Derived>& x, const ComponentBasis<Scalar>& basis) {
  if (x.cols() != basis.dim())
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(x.cols()) + " columns, basis has " +
                                                  std::to_string(basis.dim()) + " rows");
  return x * basis.directions;
}

template <typename Scalar>
ProjectedData<Scalar> project(const Standardized<Scalar>& x, const ComponentBasis<Scalar>& basis) {
  return {project(x.values, basis), basis, x.row_ids};
}

/// Orthonormal basis of span(V). Linearly dependent columns are dropped.
template <typename Derived>
Matrix<typename Derived::Scalar> orthonormal_span(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.cols() == 0) return Matrix<Scalar>(v.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(v);
  qr.setThreshold(Scalar(kRankTolerance));
  const Eigen::Index r = qr.rank();
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(v.rows(), r);
  return q;
}

/// Fraction of ||X||_F^2 captured by span of the basis. Dense bases are used
/// as given; sparse directions are orthogonalized first so overlapping
/// directions are not double counted.
template <typename Derived, typename Scalar>
Scalar expressed_variance(const Eigen::MatrixBase<Derived>& x, const ComponentBasis<Scalar>& basis) {
  if (x.cols() != basis.dim())
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(x.cols()) + " columns, basis has " +
                                                  std::to_string(basis.dim()) + " rows");
  const Scalar total = x.squaredNorm();
  if (basis.size() == 0 || !(total > Scalar(0))) return Scalar(0);
  const Matrix<Scalar> q = basis.kind == BasisKind::Dense ? basis.directions : orthonormal_span(basis.directions);
  const Scalar captured = (x * q).squaredNorm();
  return std::min(Scalar(1), captured / total);
}

template <typename Scalar>
Scalar expressed_variance(const Standardized<Scalar>& x, const ComponentBasis<Scalar>& basis) {
  return expressed_variance(x.values, basis);
}

}  // namespace pdna
