#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "pdna/outliers.hpp"
#include "pdna/pipeline.hpp"
#include "pdna/synth.hpp"
#include "test_util.hpp"

using namespace pdna;

namespace {

std::set<std::string> ids_of(const std::vector<SupportMember>& members) {
  std::set<std::string> s;
  for (const auto& m : members) s.insert(m.voter_id);
  return s;
}

SyntheticBlocs cohesive_pair_with_plant() {
  BlocParams p;
  p.groups = 2;
  p.sizes = {8, 8};
  p.bills = 30;
  p.cohesion = {1.0};
  p.planted_outliers = 1;
  p.seed = 42;
  return gen_blocs(p);
}

// Three groups of four voting as perfect blocs along unrelated lines.
VoteDataset perfect_blocs() {
  std::vector<Voter> voters;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t t = 0; t < 4; ++t) voters.push_back({"v" + std::to_string(4 * g + t), g});
  std::vector<Bill> bills;
  for (int j = 0; j < 6; ++j) bills.push_back({"b" + std::to_string(j), "", "", false});
  VoteDataset d({"A", "B", "C"}, voters, bills);
  const int line[3][6] = {{1, 1, -1, 0, 1, -1}, {-1, 1, 1, 1, 0, 0}, {0, -1, -1, 1, 1, 1}};
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 6; ++j) d.set_vote(i, j, static_cast<VoteValue>(line[i / 4][j]));
  return d;
}

}  // namespace

TEST(OutlierPipeline, FlagsPlantedCrossVoter) {
  const auto s = cohesive_pair_with_plant();
  ASSERT_EQ(s.planted.size(), 1u);
  const auto& plant = s.planted[0];
  const auto a = outlier_pipeline(s.dataset, 1, 9);
  ASSERT_EQ(a.components.size(), 1u);
  const auto& c = a.components[0];
  EXPECT_EQ(c.dominant_group, plant.voted_group);
  ASSERT_EQ(c.outliers.size(), 1u);
  EXPECT_EQ(c.outliers[0].voter_id, plant.voter_id);
  EXPECT_EQ(c.outliers[0].nominal_group, plant.nominal_group);
}

TEST(OutlierPipeline, PerfectBlocsHaveNoOutliers) {
  const auto a = outlier_pipeline(perfect_blocs(), 2, 4);
  ASSERT_EQ(a.components.size(), 2u);
  for (const auto& c : a.components) {
    EXPECT_DOUBLE_EQ(c.dominant_fraction, 1.0);
    EXPECT_TRUE(c.outliers.empty());
    EXPECT_FALSE(c.dominant_tie);
  }
}

TEST(OutlierPipeline, SingleBlocKOne) {
  std::vector<Voter> voters;
  for (int i = 0; i < 5; ++i) voters.push_back({"v" + std::to_string(i), 0});
  VoteDataset d({"A"}, voters, {{"b1", "", "", false}, {"b2", "", "", false}, {"b3", "", "", false}});
  for (std::size_t i = 0; i < 5; ++i) {
    d.set_vote(i, 0, VoteValue::Yes);
    d.set_vote(i, 1, VoteValue::No);
  }
  const auto a = outlier_pipeline(d, 1, 5);
  ASSERT_EQ(a.components.size(), 1u);
  EXPECT_EQ(ids_of(a.components[0].support), (std::set<std::string>{"v0", "v1", "v2", "v3", "v4"}));
  EXPECT_EQ(a.components[0].dominant_group, "A");
}

TEST(OutlierPipeline, SupportBoundAndOrdering) {
  BlocParams p{4, {10, 10, 10, 10}, 40, {0.9}, 0, 3};
  const auto s = gen_blocs(p);
  const auto a = outlier_pipeline(s.dataset, 4, 7);
  for (const auto& c : a.components) {
    EXPECT_LE(c.support.size(), 7u);
    for (std::size_t i = 1; i < c.support.size(); ++i)
      EXPECT_GE(std::abs(c.support[i - 1].loading), std::abs(c.support[i].loading));
  }
}

TEST(OutlierPipeline, VoterOrderDoesNotMatter) {
  BlocParams p{3, {9, 9, 9}, 40, {0.9}, 2, 17};
  const auto s = gen_blocs(p);
  std::vector<std::size_t> order(s.dataset.num_voters()), bills(s.dataset.num_bills());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  for (std::size_t j = 0; j < bills.size(); ++j) bills[j] = j;
  const auto a = outlier_pipeline(s.dataset, 3, 9);
  const auto b = outlier_pipeline(s.dataset.subset(order, bills, false), 3, 9);
  ASSERT_EQ(a.components.size(), b.components.size());
  for (std::size_t c = 0; c < a.components.size(); ++c) {
    EXPECT_EQ(ids_of(a.components[c].support), ids_of(b.components[c].support));
    EXPECT_EQ(a.components[c].dominant_group, b.components[c].dominant_group);
  }
}

TEST(OutlierPipeline, ConstantVoterExcluded) {
  auto d = perfect_blocs();
  std::vector<Voter> voters = d.voters();
  voters.push_back({"flat", 0});
  VoteDataset e(d.groups(), voters, d.bills());
  for (std::size_t i = 0; i < d.num_voters(); ++i)
    for (std::size_t j = 0; j < d.num_bills(); ++j) e.set_vote(i, j, d.vote(i, j));
  for (std::size_t j = 0; j < d.num_bills(); ++j) e.set_vote(12, j, VoteValue::Yes);
  const auto a = outlier_pipeline(e, 1, 4);
  EXPECT_EQ(a.excluded_voters, (std::vector<std::string>{"flat"}));
}

TEST(OutlierReport, PlantLeansTowardsItsBloc) {
  const auto s = cohesive_pair_with_plant();
  const auto& plant = s.planted[0];
  PipelineConfig cfg;
  cfg.reduction.k = 1;
  const auto r = run_pipeline(cfg, s.dataset);
  const auto a = outlier_pipeline(r.dataset, 1, 9);
  const auto report = outlier_report(a.components, r.dna, r.model.group_ids());
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].voter_id, plant.voter_id);
  EXPECT_EQ(report[0].dna.front().first, plant.voted_group);
  double voted = 0, nominal = 0;
  for (const auto& [g, w] : report[0].dna) {
    if (g == plant.voted_group) voted = w;
    if (g == plant.nominal_group) nominal = w;
  }
  EXPECT_GT(voted, nominal);
  EXPECT_NE(outlier_json(a, report).find(plant.voter_id), std::string::npos);
}

TEST(OutlierReport, NoOutliersNoEntries) {
  const auto a = outlier_pipeline(perfect_blocs(), 2, 4);
  EXPECT_TRUE(outlier_report(a.components, {}, {"A", "B", "C"}).empty());
}

TEST(OutlierReport, MissingDnaIsAnError) {
  const auto s = cohesive_pair_with_plant();
  const auto a = outlier_pipeline(s.dataset, 1, 9);
  EXPECT_PDNA_ERROR(outlier_report(a.components, {}, s.dataset.groups()), ErrorCode::VoterNotFound);
}
