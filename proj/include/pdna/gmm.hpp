#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pdna/error.hpp"
#include "pdna/pca.hpp"

namespace pdna {

/// Gaussian class-conditional model for one group.
template <typename Scalar>
struct GaussianClass {
  Scalar prior = 0;
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;
  Eigen::LLT<Matrix<Scalar>> factor;
  Scalar log_det = 0;  // log det(covariance) = 2 * sum log diag(L)
};

/// Covariance shrinkage Sigma + lambda I. Auto picks the smallest of
/// {0, 1e-8, 1e-6, 1e-4, 1e-2} * trace(pooled)/k that brings every class
/// covariance to a condition number of at most 1e8.
struct LambdaPolicy {
  bool automatic = true;
  double value = 0;

  static LambdaPolicy fixed(double v) { return {false, v}; }
  static LambdaPolicy autoselect() { return {true, 0}; }
};

inline constexpr std::array<double, 5> kLambdaLadder{0.0, 1e-8, 1e-6, 1e-4, 1e-2};
inline constexpr double kMaxCondition = 1e8;

template <typename Scalar>
class GmmModel {
 public:
  GmmModel() = default;

  /// Validates and factors the class parameters. Throws SingularCovariance
  /// when a covariance is not symmetric positive definite.
  GmmModel(std::vector<std::string> group_ids, std::vector<GaussianClass<Scalar>> classes, Scalar lambda)
      : group_ids_(std::move(group_ids)), classes_(std::move(classes)), lambda_(lambda) {
    if (group_ids_.size() != classes_.size())
      throw Error(ErrorCode::DimensionMismatch, "group id count differs from class count");
    if (classes_.empty()) throw Error(ErrorCode::InvalidArgument, "model needs at least one class");
    dim_ = classes_.front().mean.size();
    for (std::size_t g = 0; g < classes_.size(); ++g) {
      auto& c = classes_[g];
      if (c.mean.size() != dim_ || c.covariance.rows() != dim_ || c.covariance.cols() != dim_)
        throw Error(ErrorCode::DimensionMismatch, "class '" + group_ids_[g] + "' has inconsistent dimensions");
      c.covariance = (c.covariance + c.covariance.transpose()) / Scalar(2);
      c.factor.compute(c.covariance);
      if (c.factor.info() != Eigen::Success)
        throw Error(ErrorCode::SingularCovariance, "covariance of '" + group_ids_[g] + "' is not positive definite");
      const Vector<Scalar> diag = c.factor.matrixLLT().diagonal();
      if ((diag.array() <= Scalar(0)).any())
        throw Error(ErrorCode::SingularCovariance, "covariance of '" + group_ids_[g] + "' is not positive definite");
      c.log_det = Scalar(2) * diag.array().log().sum();
    }
  }

  const std::vector<std::string>& group_ids() const noexcept { return group_ids_; }
  const std::vector<GaussianClass<Scalar>>& classes() const noexcept { return classes_; }
  std::size_t num_groups() const noexcept { return classes_.size(); }
  Eigen::Index dim() const noexcept { return dim_; }
  Scalar lambda() const noexcept { return lambda_; }

 private:
  std::vector<std::string> group_ids_;
  std::vector<GaussianClass<Scalar>> classes_;
  Scalar lambda_ = 0;
  Eigen::Index dim_ = 0;
};

struct GmmFitOptions {
  LambdaPolicy lambda = LambdaPolicy::autoselect();
  bool uniform_priors = false;
};

namespace detail {

template <typename Scalar>
Scalar condition_number(const Matrix<Scalar>& s) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(s, Eigen::EigenvaluesOnly);
  const Scalar lo = es.eigenvalues().minCoeff();
  const Scalar hi = es.eigenvalues().maxCoeff();
  if (!(lo > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  return hi / lo;
}

}  // namespace detail

/// Maximum-likelihood class parameters: prior |G|/m, sample mean, unbiased
/// sample covariance, plus lambda I. Throws GroupTooSmall when a group has
/// fewer than two members.
template <typename Derived>
GmmModel<typename Derived::Scalar> gmm_fit(const Eigen::MatrixBase<Derived>& x, const std::vector<std::size_t>& labels,
                                           const std::vector<std::string>& group_ids, const GmmFitOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = x.rows();
  const Eigen::Index k = x.cols();
  const std::size_t ng = group_ids.size();
  if (static_cast<Eigen::Index>(labels.size()) != m)
    throw Error(ErrorCode::DimensionMismatch, std::to_string(labels.size()) + " labels for " + std::to_string(m) + " rows");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "reduced dimension must be at least 1");
  if (!opt.lambda.automatic && !(opt.lambda.value >= 0))
    throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");

  std::vector<Eigen::Index> counts(ng, 0);
  for (std::size_t l : labels) {
    if (l >= ng) throw Error(ErrorCode::DimensionMismatch, "label " + std::to_string(l) + " has no group id");
    ++counts[l];
  }
  for (std::size_t g = 0; g < ng; ++g)
    if (counts[g] < 2)
      throw Error(ErrorCode::GroupTooSmall,
                  "group '" + group_ids[g] + "' has " + std::to_string(counts[g]) + " member(s), need at least 2");

  std::vector<Vector<Scalar>> means(ng, Vector<Scalar>::Zero(k));
  for (Eigen::Index i = 0; i < m; ++i) means[labels[static_cast<std::size_t>(i)]] += x.row(i).transpose();
  for (std::size_t g = 0; g < ng; ++g) means[g] /= Scalar(counts[g]);

  std::vector<Matrix<Scalar>> scatter(ng, Matrix<Scalar>::Zero(k, k));
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t g = labels[static_cast<std::size_t>(i)];
    const Vector<Scalar> d = x.row(i).transpose() - means[g];
    scatter[g].noalias() += d * d.transpose();
  }

  std::vector<Matrix<Scalar>> sample_cov(ng);
  Matrix<Scalar> pooled = Matrix<Scalar>::Zero(k, k);
  for (std::size_t g = 0; g < ng; ++g) {
    sample_cov[g] = scatter[g] / Scalar(counts[g] - 1);
    pooled += scatter[g];
  }
  if (m > static_cast<Eigen::Index>(ng)) pooled /= Scalar(m - static_cast<Eigen::Index>(ng));

  Scalar lambda = Scalar(opt.lambda.value);
  if (opt.lambda.automatic) {
    Scalar scale = pooled.trace() / Scalar(k);
    if (!(scale > Scalar(0))) scale = Scalar(1);
    for (double factor : kLambdaLadder) {
      lambda = Scalar(factor) * scale;
      bool ok = true;
      for (std::size_t g = 0; g < ng && ok; ++g) {
        Matrix<Scalar> s = sample_cov[g];
        s.diagonal().array() += lambda;
        ok = detail::condition_number(s) <= Scalar(kMaxCondition);
      }
      if (ok) break;
    }
  } else if (lambda == Scalar(0)) {
    for (std::size_t g = 0; g < ng; ++g)
      if (!(detail::condition_number(sample_cov[g]) < Scalar(1) / std::numeric_limits<Scalar>::epsilon()))
        throw Error(ErrorCode::SingularCovariance,
                    "covariance of '" + group_ids[g] + "' is rank deficient and lambda is fixed at 0");
  }

  std::vector<GaussianClass<Scalar>> classes(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    classes[g].prior = opt.uniform_priors ? Scalar(1) / Scalar(ng) : Scalar(counts[g]) / Scalar(m);
    classes[g].mean = means[g];
    classes[g].covariance = sample_cov[g];
    classes[g].covariance.diagonal().array() += lambda;
  }
  return GmmModel<Scalar>(group_ids, std::move(classes), lambda);
}

/// Posterior group probabilities of one voter.
template <typename Scalar>
struct DnaVector {
  std::string voter_id;
  Vector<Scalar> pi;
};

/// Unnormalized log posterior: log prior - log det / 2 - Mahalanobis^2 / 2.
template <typename Scalar, typename Derived>
Vector<Scalar> log_weights(const GmmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != model.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "point has dimension " + std::to_string(x.size()) + ", model has " + std::to_string(model.dim()));
  Vector<Scalar> lw(static_cast<Eigen::Index>(model.num_groups()));
  for (std::size_t g = 0; g < model.num_groups(); ++g) {
    const auto& c = model.classes()[g];
    const Vector<Scalar> r = c.factor.matrixL().solve(x - c.mean);
    lw(static_cast<Eigen::Index>(g)) = std::log(c.prior) - Scalar(0.5) * c.log_det - Scalar(0.5) * r.squaredNorm();
  }
  return lw;
}

template <typename Scalar, typename Derived>
Vector<Scalar> posterior(const GmmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  const Vector<Scalar> lw = log_weights(model, x);
  const Vector<Scalar> w = (lw.array() - lw.maxCoeff()).exp();
  return w / w.sum();
}

template <typename Scalar, typename Derived>
DnaVector<Scalar> dna_posterior(const GmmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x,
                                std::string voter_id = {}) {
  return {std::move(voter_id), posterior(model, x)};
}

template <typename Scalar>
std::vector<DnaVector<Scalar>> dna_all(const GmmModel<Scalar>& model, const ProjectedData<Scalar>& data) {
  std::vector<DnaVector<Scalar>> out;
  out.reserve(static_cast<std::size_t>(data.values.rows()));
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    std::string id = static_cast<std::size_t>(i) < data.row_ids.size() ? data.row_ids[static_cast<std::size_t>(i)]
                                                                         : std::to_string(i);
    out.push_back(dna_posterior(model, data.values.row(i).transpose(), std::move(id)));
  }
  return out;
}

/// Model as JSON text: priors, means, covariances, lambda, k, group ids.
std::string model_json(const GmmModel<double>& model);

/// One row per voter with probabilities at 6 decimals and the nominal group.
std::string dna_csv(const std::vector<DnaVector<double>>& dna, const std::vector<std::string>& group_ids,
                    const std::vector<std::string>& nominal_groups);

}  // namespace pdna
