#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pdna/dataset.hpp"
#include "pdna/gmm.hpp"
#include "pdna/spca.hpp"

namespace pdna {

struct SupportMember {
  std::string voter_id;
  std::string nominal_group;
  double loading = 0;
};

/// One sparse component over voters: its support, the plurality nominal
/// group within it, and the support members outside that group.
struct ComponentProfile {
  std::size_t component = 0;                 // 1-based
  std::vector<SupportMember> support;        // by |loading| descending, ties by voter order
  std::string dominant_group;
  double dominant_fraction = 0;
  bool dominant_tie = false;                 // plurality tie, broken by smallest group id
  std::vector<SupportMember> outliers;       // support members not in dominant_group
};

struct OutlierAnalysis {
  std::vector<ComponentProfile> components;
  std::vector<std::string> excluded_voters;  // constant vote record, no variance to standardize
  double expressed_variance = 0;
  Eigen::Index k = 0;
  Eigen::Index p = 0;
};

/// Encode, transpose to bills x voters, standardize every voter column over
/// the bills, extract k sparse components with at most p voters each, and
/// profile each support against the nominal groups. Voters with a constant
/// vote record are excluded before standardization and listed.
OutlierAnalysis outlier_pipeline(const VoteDataset& d, Eigen::Index k, Eigen::Index p, const SpcaOptions& opt = {});

struct OutlierEntry {
  std::size_t component = 0;
  std::string voter_id;
  std::string nominal_group;
  std::string dominant_group;
  std::vector<std::pair<std::string, double>> dna;  // by weight descending
};

/// Joins every outlier with its affinity vector. Throws VoterNotFound.
std::vector<OutlierEntry> outlier_report(const std::vector<ComponentProfile>& profiles,
                                         const std::vector<DnaVector<double>>& dna,
                                         const std::vector<std::string>& group_ids);

/// JSON document: run parameters, E-Var, component profiles and the report.
std::string outlier_json(const OutlierAnalysis& analysis, const std::vector<OutlierEntry>& report);

}  // namespace pdna
