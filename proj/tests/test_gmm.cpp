#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pdna/gmm.hpp"
#include "test_util.hpp"

using namespace pdna;

namespace {

Eigen::MatrixXd four_points() {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 2, 0, 10, 10, 10, 12;
  return x;
}

const std::vector<std::size_t> kFourLabels{0, 0, 1, 1};
const std::vector<std::string> kTwoGroups{"A", "B"};

GmmModel<double> spherical_pair(const Eigen::VectorXd& m1, const Eigen::VectorXd& m2, double var) {
  const Eigen::Index k = m1.size();
  std::vector<GaussianClass<double>> cls(2);
  cls[0].prior = cls[1].prior = 0.5;
  cls[0].mean = m1;
  cls[1].mean = m2;
  cls[0].covariance = cls[1].covariance = var * Eigen::MatrixXd::Identity(k, k);
  return GmmModel<double>(kTwoGroups, cls, 0.0);
}

}  // namespace

TEST(GmmFit, HandEvaluatedEstimators) {
  const double lambda = 0.25;
  const auto model = gmm_fit(four_points(), kFourLabels, kTwoGroups, {LambdaPolicy::fixed(lambda), false});
  const auto& c = model.classes();
  EXPECT_DOUBLE_EQ(c[0].prior, 0.5);
  EXPECT_DOUBLE_EQ(c[1].prior, 0.5);
  EXPECT_TRUE(c[0].mean.isApprox(Eigen::Vector2d(1, 0)));
  EXPECT_TRUE(c[1].mean.isApprox(Eigen::Vector2d(10, 11)));
  Eigen::Matrix2d s1, s2;
  s1 << 2 + lambda, 0, 0, lambda;
  s2 << lambda, 0, 0, 2 + lambda;
  EXPECT_TRUE(c[0].covariance.isApprox(s1, 1e-14));
  EXPECT_TRUE(c[1].covariance.isApprox(s2, 1e-14));
  EXPECT_DOUBLE_EQ(model.lambda(), lambda);
}

TEST(GmmFit, SingularWithoutShrinkage) {
  EXPECT_PDNA_ERROR(gmm_fit(four_points(), kFourLabels, kTwoGroups, {LambdaPolicy::fixed(0.0), false}),
                    ErrorCode::SingularCovariance);
}

TEST(GmmFit, AutoLambdaPicksFirstWellConditionedRung) {
  const auto model = gmm_fit(four_points(), kFourLabels, kTwoGroups);
  // pooled scatter = diag(2, 2) / (4 - 2) -> trace/k = 1; zero fails, so the
  // ladder lands on the first non-zero rung that keeps cond <= 1e8
  const double scale = 1.0;
  double expected = -1;
  for (double f : kLambdaLadder) {
    if (f == 0) continue;
    if ((2 + f * scale) / (f * scale) <= 1e8) {
      expected = f * scale;
      break;
    }
  }
  EXPECT_DOUBLE_EQ(model.lambda(), expected);
}

TEST(GmmFit, AutoLambdaZeroWhenWellConditioned) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = oracle::random_matrix(rng, 40, 3);
  std::vector<std::size_t> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = i % 2;
  EXPECT_EQ(gmm_fit(x, labels, kTwoGroups).lambda(), 0.0);
}

TEST(GmmFit, SingleGroupHasUnitPrior) {
  std::mt19937_64 rng(2);
  const auto model = gmm_fit(oracle::random_matrix(rng, 10, 2), std::vector<std::size_t>(10, 0), {"A"});
  EXPECT_DOUBLE_EQ(model.classes()[0].prior, 1.0);
}

TEST(GmmFit, UniformPriors) {
  std::mt19937_64 rng(3);
  std::vector<std::size_t> labels(12, 0);
  labels[0] = labels[1] = labels[2] = 1;
  const auto model = gmm_fit(oracle::random_matrix(rng, 12, 2), labels, kTwoGroups, {LambdaPolicy::autoselect(), true});
  EXPECT_DOUBLE_EQ(model.classes()[0].prior, 0.5);
  EXPECT_DOUBLE_EQ(model.classes()[1].prior, 0.5);
}

TEST(GmmFit, Errors) {
  EXPECT_PDNA_ERROR(gmm_fit(four_points(), {0, 0, 0, 1}, kTwoGroups), ErrorCode::GroupTooSmall);
  EXPECT_PDNA_ERROR(gmm_fit(four_points(), {0, 1}, kTwoGroups), ErrorCode::DimensionMismatch);
  EXPECT_PDNA_ERROR(gmm_fit(four_points(), kFourLabels, kTwoGroups, {LambdaPolicy::fixed(-1), false}),
                    ErrorCode::InvalidArgument);
}

TEST(Posterior, EquidistantPointIsHalfHalf) {
  const auto model = spherical_pair(Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 0), 1.0);
  const auto pi = posterior(model, Eigen::Vector2d(0, 3));
  EXPECT_NEAR(pi(0), 0.5, 1e-15);
  EXPECT_NEAR(pi(1), 0.5, 1e-15);
}

TEST(Posterior, TwentySigmaSeparation) {
  const double sd = 0.3;
  const auto model = spherical_pair(Eigen::Vector2d(0, 0), Eigen::Vector2d(20 * sd, 0), sd * sd);
  const auto pi = posterior(model, Eigen::Vector2d(0, 0));
  EXPECT_GT(pi(0), 1 - 1e-10);
  // two-class logistic of the Mahalanobis gap: log-odds = 20^2 / 2
  EXPECT_NEAR(std::log(pi(0) / pi(1)), 200.0, 1e-9);
}

TEST(Posterior, MatchesDirectDensityRatio) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t ng = 2 + rng() % 4;
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 4);
    std::vector<GaussianClass<double>> cls(ng);
    std::vector<double> priors;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;
    double total = 0;
    for (auto& c : cls) total += (c.prior = unif(rng));
    std::vector<std::string> ids;
    for (std::size_t g = 0; g < ng; ++g) {
      cls[g].prior /= total;
      cls[g].mean = oracle::random_matrix(rng, k, 1);
      cls[g].covariance = oracle::random_spd(rng, k, 1e4);
      priors.push_back(cls[g].prior);
      means.push_back(cls[g].mean);
      covs.push_back(cls[g].covariance);
      ids.push_back("g" + std::to_string(g));
    }
    const GmmModel<double> model(ids, cls, 0.0);
    const Eigen::VectorXd x = oracle::random_matrix(rng, k, 1);
    const Eigen::VectorXd got = posterior(model, x);
    const Eigen::VectorXd want = oracle::direct_posterior(priors, means, covs, x);
    EXPECT_NEAR(got.sum(), 1.0, 1e-12);
    for (Eigen::Index g = 0; g < got.size(); ++g) EXPECT_NEAR(got(g), want(g), 1e-9 * std::max(1.0, want(g)));
  }
}

TEST(Posterior, FarPointDoesNotUnderflow) {
  const auto model = spherical_pair(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), 1e-3);
  const auto pi = posterior(model, Eigen::Vector2d(1e4, 0));
  EXPECT_TRUE(pi.allFinite());
  EXPECT_NEAR(pi.sum(), 1.0, 1e-15);
  EXPECT_GT(pi(1), pi(0));
}

TEST(Posterior, RelabelingPermutesOutput) {
  std::mt19937_64 rng(5);
  std::vector<std::size_t> labels(30);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = i % 3;
  const Eigen::MatrixXd x = oracle::random_matrix(rng, 30, 2);
  const auto a = gmm_fit(x, labels, {"A", "B", "C"});
  std::vector<std::size_t> swapped(labels);
  for (auto& l : swapped) l = 2 - l;
  const auto b = gmm_fit(x, swapped, {"C", "B", "A"});
  for (Eigen::Index i = 0; i < 30; ++i) {
    const Eigen::VectorXd pa = posterior(a, x.row(i).transpose());
    const Eigen::VectorXd pb = posterior(b, x.row(i).transpose());
    EXPECT_TRUE(pa.isApprox(pb.reverse(), 1e-12));
  }
}

TEST(Posterior, InvariantUnderTranslation) {
  std::mt19937_64 rng(6);
  std::vector<std::size_t> labels(24);
  for (std::size_t i = 0; i < 24; ++i) labels[i] = i % 2;
  const Eigen::MatrixXd x = oracle::random_matrix(rng, 24, 3);
  const Eigen::RowVector3d shift(5, -7, 2);
  const Eigen::MatrixXd y = x.rowwise() + shift;
  const auto a = gmm_fit(x, labels, kTwoGroups);
  const auto b = gmm_fit(y, labels, kTwoGroups);
  for (Eigen::Index i = 0; i < 24; ++i)
    EXPECT_TRUE(posterior(a, x.row(i).transpose()).isApprox(posterior(b, y.row(i).transpose()), 1e-9));
}

TEST(DnaAll, SingleGroupIsOne) {
  std::mt19937_64 rng(7);
  ProjectedData<double> data;
  data.values = oracle::random_matrix(rng, 6, 2);
  data.row_ids = {"a", "b", "c", "d", "e", "f"};
  const auto model = gmm_fit(data.values, std::vector<std::size_t>(6, 0), {"A"});
  const auto dna = dna_all(model, data);
  ASSERT_EQ(dna.size(), 6u);
  for (const auto& d : dna) EXPECT_DOUBLE_EQ(d.pi(0), 1.0);
  EXPECT_EQ(dna[3].voter_id, "d");
}

TEST(Posterior, DimensionMismatch) {
  const auto model = spherical_pair(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), 1.0);
  EXPECT_PDNA_ERROR(posterior(model, Eigen::Vector3d(0, 0, 0)), ErrorCode::DimensionMismatch);
}

TEST(GmmModel, RejectsIndefiniteCovariance) {
  std::vector<GaussianClass<double>> cls(1);
  cls[0].prior = 1;
  cls[0].mean = Eigen::Vector2d::Zero();
  cls[0].covariance = Eigen::Vector2d(1, -1).asDiagonal();
  EXPECT_PDNA_ERROR(GmmModel<double>({"A"}, cls, 0.0), ErrorCode::SingularCovariance);
}

TEST(ModelIo, JsonAndCsv) {
  const auto model = gmm_fit(four_points(), kFourLabels, kTwoGroups, {LambdaPolicy::fixed(0.5), false});
  const std::string j = model_json(model);
  EXPECT_NE(j.find("\"priors\""), std::string::npos);
  EXPECT_NE(j.find("\"lambda\": 0.5"), std::string::npos);
  std::vector<DnaVector<double>> dna{{"s1", Eigen::Vector2d(0.25, 0.75)}};
  EXPECT_EQ(dna_csv(dna, kTwoGroups, {"B"}), "voter_id,A,B,nominal_group\ns1,0.250000,0.750000,B\n");
}
