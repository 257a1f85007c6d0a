#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pdna/error.hpp"
#include "pdna/pca.hpp"

namespace pdna {

struct SpcaOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;  // relative objective gain below which iteration stops
  int restarts = 0;          // extra starts from the largest-norm coordinates
  bool refine = false;       // 1-swap local search on the winning support
};

/// One sparse rank-1 factor X ~ sigma * u * v^T with ||v||_0 <= p.
template <typename Scalar>
struct SparseFactor {
  Vector<Scalar> v;
  Vector<Scalar> u;
  Scalar sigma = 0;
  std::vector<Eigen::Index> support;  // ascending
  int iterations = 0;
  bool converged = false;
  int start = 0;                     // 0 = dense start, r > 0 = r-th restart
  std::vector<Scalar> objective;     // sigma after every iteration of the winning start
};

/// Keeps the p entries of w with the largest magnitude and zeroes the rest.
/// Equal magnitudes are ranked by lower index.
template <typename Derived>
Vector<typename Derived::Scalar> hard_threshold(const Eigen::MatrixBase<Derived>& w, Eigen::Index p) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = w.size();
  if (p >= n) return w;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::partial_sort(idx.begin(), idx.begin() + p, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const Scalar fa = std::abs(w(a)), fb = std::abs(w(b));
    return fa > fb || (fa == fb && a < b);
  });
  Vector<Scalar> out = Vector<Scalar>::Zero(n);
  for (Eigen::Index t = 0; t < p; ++t) out(idx[static_cast<std::size_t>(t)]) = w(idx[static_cast<std::size_t>(t)]);
  return out;
}

template <typename Derived>
std::vector<Eigen::Index> support_of(const Eigen::MatrixBase<Derived>& v) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) != 0) s.push_back(i);
  return s;
}

namespace detail {

// Truncated power iteration from a unit start vector. Alternates
// v <- HT_p(X^T u)/||.||, u <- Xv/||Xv||; sigma = ||Xv|| never decreases.
template <typename Scalar>
SparseFactor<Scalar> truncated_power(const Matrix<Scalar>& x, const Vector<Scalar>& start, Eigen::Index p,
                                     const SpcaOptions& opt) {
  SparseFactor<Scalar> f;
  Vector<Scalar> z = x * start;
  Scalar norm = z.norm();
  if (!(norm > Scalar(0))) return f;
  Vector<Scalar> u = z / norm;
  Scalar previous = 0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Vector<Scalar> v = hard_threshold(x.transpose() * u, p);
    const Scalar vn = v.norm();
    if (!(vn > Scalar(0))) break;
    v /= vn;
    z = x * v;
    const Scalar sigma = z.norm();
    if (!(sigma > Scalar(0))) break;
    f.v = std::move(v);
    f.u = z / sigma;
    f.sigma = sigma;
    f.iterations = it;
    f.objective.push_back(sigma);
    u = f.u;
    if (it > 1 && sigma - previous < Scalar(opt.tolerance) * sigma) {
      f.converged = true;
      break;
    }
    previous = sigma;
  }
  return f;
}

// Leading eigenpair of the principal submatrix g(s, s).
template <typename Scalar>
std::pair<Scalar, Vector<Scalar>> leading_on(const Matrix<Scalar>& g, const std::vector<Eigen::Index>& s) {
  const auto q = static_cast<Eigen::Index>(s.size());
  Matrix<Scalar> sub(q, q);
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index b = 0; b < q; ++b) sub(a, b) = g(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sub);
  return {es.eigenvalues()(q - 1), es.eigenvectors().col(q - 1)};
}

// Exchange one support coordinate for one outside it while that raises the
// leading singular value of the column submatrix. First improvement in index
// order, so the result is deterministic.
template <typename Scalar>
void swap_refine(const Matrix<Scalar>& x, SparseFactor<Scalar>& f, Eigen::Index p, const SpcaOptions& opt) {
  const Eigen::Index n = x.cols();
  if (f.v.size() != n || p >= n) return;
  const Matrix<Scalar> g = x.transpose() * x;
  std::vector<Eigen::Index> s = support_of(f.v);
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (Eigen::Index j : s) in[static_cast<std::size_t>(j)] = true;
  Scalar best = leading_on(g, s).first;
  bool moved = false;
  for (int sweep = 0; sweep < opt.max_iterations; ++sweep) {
    bool improved = false;
    for (std::size_t a = 0; a < s.size() && !improved; ++a)
      for (Eigen::Index j = 0; j < n && !improved; ++j) {
        if (in[static_cast<std::size_t>(j)]) continue;
        std::vector<Eigen::Index> t = s;
        t[a] = j;
        std::sort(t.begin(), t.end());
        const Scalar lam = leading_on(g, t).first;
        if (lam > best * (Scalar(1) + Scalar(opt.tolerance))) {
          in[static_cast<std::size_t>(s[a])] = false;
          in[static_cast<std::size_t>(j)] = true;
          s = std::move(t);
          best = lam;
          improved = moved = true;
        }
      }
    if (!improved) break;
  }
  if (!moved) return;
  const Vector<Scalar> w = leading_on(g, s).second;
  Vector<Scalar> v = Vector<Scalar>::Zero(n);
  for (std::size_t a = 0; a < s.size(); ++a) v(s[a]) = w(static_cast<Eigen::Index>(a));
  v.normalize();
  const Vector<Scalar> z = x * v;
  const Scalar sigma = z.norm();
  if (!(sigma > f.sigma)) return;
  f.v = v;
  f.u = z / sigma;
  f.sigma = sigma;
  f.objective.push_back(sigma);
}

template <typename Scalar>
void finish(SparseFactor<Scalar>& f) {
  if (orient(f.v)) f.u = -f.u;
  f.support = support_of(f.v);
}

}  // namespace detail

/// Best rank-1 approximation with at most p nonzeros in the right factor,
/// by truncated power iteration started from the dense leading right
/// singular vector. Non-convergence is reported in the result, not thrown.
template <typename Derived>
SparseFactor<typename Derived::Scalar> spca_rank1(const Eigen::MatrixBase<Derived>& x_in, Eigen::Index p,
                                                  const SpcaOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> x = x_in;
  const Eigen::Index n = x.cols();
  if (p < 1 || p > n)
    throw Error(ErrorCode::InvalidArgument, "sparsity p=" + std::to_string(p) + " outside [1, " + std::to_string(n) + "]");
  if (x.size() == 0 || x.cwiseAbs().maxCoeff() == Scalar(0)) throw Error(ErrorCode::ZeroMatrix, "input matrix is all zeros");

  Eigen::BDCSVD<Matrix<Scalar>> svd(x, Eigen::ComputeThinV);
  SparseFactor<Scalar> best = detail::truncated_power<Scalar>(x, svd.matrixV().col(0), p, opt);

  if (opt.restarts > 0) {
    const Vector<Scalar> col_norms = x.colwise().norm().transpose();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return col_norms(a) > col_norms(b); });
    const int r_max = std::min<int>(opt.restarts, static_cast<int>(n));
    for (int r = 1; r <= r_max; ++r) {
      const Vector<Scalar> e = Vector<Scalar>::Unit(n, order[static_cast<std::size_t>(r - 1)]);
      SparseFactor<Scalar> cand = detail::truncated_power<Scalar>(x, e, p, opt);
      cand.start = r;
      if (cand.sigma > best.sigma) best = std::move(cand);
    }
  }
  if (opt.refine) detail::swap_refine(x, best, p, opt);
  detail::finish(best);
  return best;
}

/// k sparse components by repeated spca_rank1 on the residual, each followed
/// by X <- X - sigma u v^T. Singular values are kept in extraction order.
template <typename Derived>
ComponentBasis<typename Derived::Scalar> spca_fit(const Eigen::MatrixBase<Derived>& x, Eigen::Index k, Eigen::Index p,
                                                  const SpcaOptions& opt = {},
                                                  std::vector<SparseFactor<typename Derived::Scalar>>* factors = nullptr) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index limit = std::min(x.rows(), x.cols());
  if (k < 1 || k > limit)
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " outside [1, min(m,n)=" + std::to_string(limit) + "]");
  if (p < 1 || p > x.cols())
    throw Error(ErrorCode::InvalidArgument,
                "sparsity p=" + std::to_string(p) + " outside [1, " + std::to_string(x.cols()) + "]");

  Matrix<Scalar> residual = x;
  const Scalar total = residual.norm();
  if (!(total > Scalar(0))) throw Error(ErrorCode::ZeroMatrix, "input matrix is all zeros");

  ComponentBasis<Scalar> basis;
  basis.kind = BasisKind::Sparse;
  basis.sparsity = p;
  basis.directions.resize(x.cols(), k);
  basis.singular_values.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (residual.norm() < Scalar(1e-12) * total)
      throw Error(ErrorCode::DeflationExhausted,
                  "residual vanished after " + std::to_string(c) + " of " + std::to_string(k) + " components");
    SparseFactor<Scalar> f = spca_rank1(residual, p, opt);
    residual.noalias() -= f.sigma * f.u * f.v.transpose();
    basis.directions.col(c) = f.v;
    basis.singular_values(c) = f.sigma;
    if (factors) factors->push_back(std::move(f));
  }
  return basis;
}

template <typename Scalar>
ComponentBasis<Scalar> spca_fit(const Standardized<Scalar>& x, Eigen::Index k, Eigen::Index p, const SpcaOptions& opt = {}) {
  return spca_fit(x.values, k, p, opt);
}

/// Exhaustive search over all supports of size p, exact for small n.
/// Limited to n <= 12 and p <= 4.
template <typename Derived>
SparseFactor<typename Derived::Scalar> spca_oracle(const Eigen::MatrixBase<Derived>& x, Eigen::Index p) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.cols();
  if (n > 12 || p > 4)
    throw Error(ErrorCode::BudgetExceeded, "oracle limited to n <= 12, p <= 4 (got n=" + std::to_string(n) +
                                               ", p=" + std::to_string(p) + ")");
  if (p < 1 || p > n)
    throw Error(ErrorCode::InvalidArgument, "sparsity p=" + std::to_string(p) + " outside [1, " + std::to_string(n) + "]");
  if (x.size() == 0 || x.cwiseAbs().maxCoeff() == Scalar(0)) throw Error(ErrorCode::ZeroMatrix, "input matrix is all zeros");

  SparseFactor<Scalar> best;
  best.sigma = Scalar(-1);
  std::vector<Eigen::Index> s(static_cast<std::size_t>(p));
  std::iota(s.begin(), s.end(), Eigen::Index{0});
  Matrix<Scalar> sub(x.rows(), p);
  while (true) {
    for (Eigen::Index c = 0; c < p; ++c) sub.col(c) = x.col(s[static_cast<std::size_t>(c)]);
    Eigen::JacobiSVD<Matrix<Scalar>> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(0) > best.sigma) {
      best.sigma = svd.singularValues()(0);
      best.v = Vector<Scalar>::Zero(n);
      for (Eigen::Index c = 0; c < p; ++c) best.v(s[static_cast<std::size_t>(c)]) = svd.matrixV()(c, 0);
      best.u = svd.matrixU().col(0);
    }
    // next combination in lexicographic order
    Eigen::Index i = p - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++s[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < p; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
  }
  best.converged = true;
  detail::finish(best);
  return best;
}

}  // namespace pdna
