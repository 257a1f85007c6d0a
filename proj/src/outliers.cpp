#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "pdna/outliers.hpp"
#include "pdna/preprocess.hpp"

namespace pdna {

OutlierAnalysis outlier_pipeline(const VoteDataset& d, Eigen::Index k, Eigen::Index p, const SpcaOptions& opt) {
  const EncodedMatrix z = encode(d);
  const Eigen::MatrixXd zt = z.values.transpose().cast<double>();  // bills x voters

  OutlierAnalysis out;
  out.k = k;
  out.p = p;

  const auto stats = column_stats(zt);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < d.num_voters(); ++i) {
    if (stats.norms(static_cast<Eigen::Index>(i)) > 0)
      kept.push_back(i);
    else
      out.excluded_voters.push_back(d.voters()[i].id);
  }
  if (kept.empty()) throw Error(ErrorCode::ZeroVarianceColumn, "every voter has a constant vote record");

  Eigen::MatrixXd sub(zt.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = zt.col(static_cast<Eigen::Index>(kept[c]));
  const Eigen::MatrixXd x = standardize_columns(sub);

  const ComponentBasis<double> basis = spca_fit(x, k, p, opt);
  out.expressed_variance = expressed_variance(x, basis);

  for (Eigen::Index c = 0; c < basis.size(); ++c) {
    ComponentProfile prof;
    prof.component = static_cast<std::size_t>(c) + 1;
    const Eigen::VectorXd v = basis.directions.col(c);

    std::vector<Eigen::Index> members = support_of(v);
    std::stable_sort(members.begin(), members.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(v(a)) > std::abs(v(b)); });
    std::map<std::string, std::size_t> counts;  // ordered by group id
    for (Eigen::Index r : members) {
      const std::size_t voter = kept[static_cast<std::size_t>(r)];
      prof.support.push_back(SupportMember{d.voters()[voter].id, d.group_of(voter), v(r)});
      ++counts[d.group_of(voter)];
    }
    if (!prof.support.empty()) {
      std::size_t best = 0;
      for (const auto& [group, n] : counts) {
        if (n > best) {
          best = n;
          prof.dominant_group = group;
          prof.dominant_tie = false;
        } else if (n == best) {
          prof.dominant_tie = true;
        }
      }
      prof.dominant_fraction = static_cast<double>(best) / static_cast<double>(prof.support.size());
      for (const auto& mbr : prof.support)
        if (mbr.nominal_group != prof.dominant_group) prof.outliers.push_back(mbr);
    }
    out.components.push_back(std::move(prof));
  }
  return out;
}

std::vector<OutlierEntry> outlier_report(const std::vector<ComponentProfile>& profiles,
                                         const std::vector<DnaVector<double>>& dna,
                                         const std::vector<std::string>& group_ids) {
  std::map<std::string, const DnaVector<double>*> by_id;
  for (const auto& d : dna) by_id.emplace(d.voter_id, &d);

  std::vector<OutlierEntry> report;
  for (const auto& prof : profiles)
    for (const auto& o : prof.outliers) {
      auto it = by_id.find(o.voter_id);
      if (it == by_id.end()) throw Error(ErrorCode::VoterNotFound, "no DNA for voter '" + o.voter_id + "'");
      const Eigen::VectorXd& pi = it->second->pi;
      if (static_cast<std::size_t>(pi.size()) != group_ids.size())
        throw Error(ErrorCode::DimensionMismatch, "DNA of '" + o.voter_id + "' does not match the group list");
      OutlierEntry e{prof.component, o.voter_id, o.nominal_group, prof.dominant_group, {}};
      std::vector<std::size_t> idx(group_ids.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pi(static_cast<Eigen::Index>(a)) > pi(static_cast<Eigen::Index>(b));
      });
      for (std::size_t g : idx) e.dna.emplace_back(group_ids[g], pi(static_cast<Eigen::Index>(g)));
      report.push_back(std::move(e));
    }
  return report;
}

std::string outlier_json(const OutlierAnalysis& analysis, const std::vector<OutlierEntry>& report) {
  using json = nlohmann::json;
  json doc;
  doc["parameters"] = {{"k", analysis.k}, {"p", analysis.p}};
  doc["expressed_variance"] = analysis.expressed_variance;
  doc["excluded_voters"] = analysis.excluded_voters;
  json comps = json::array();
  for (const auto& c : analysis.components) {
    json support = json::array(), outliers = json::array();
    for (const auto& s : c.support)
      support.push_back({{"voter_id", s.voter_id}, {"nominal_group", s.nominal_group}, {"loading", s.loading}});
    for (const auto& s : c.outliers) outliers.push_back({{"voter_id", s.voter_id}, {"nominal_group", s.nominal_group}});
    comps.push_back({{"component", c.component},
                     {"dominant_group", c.dominant_group},
                     {"dominant_fraction", c.dominant_fraction},
                     {"dominant_tie", c.dominant_tie},
                     {"support", std::move(support)},
                     {"outliers", std::move(outliers)}});
  }
  doc["components"] = std::move(comps);
  json rep = json::array();
  for (const auto& e : report) {
    json dna = json::array();
    for (const auto& [g, w] : e.dna) dna.push_back({{"group", g}, {"weight", w}});
    rep.push_back({{"component", e.component},
                   {"voter_id", e.voter_id},
                   {"nominal_group", e.nominal_group},
                   {"dominant_group", e.dominant_group},
                   {"dna", std::move(dna)}});
  }
  doc["report"] = std::move(rep);
  return doc.dump(2) + "\n";
}

}  // namespace pdna
