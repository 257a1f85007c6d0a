#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "pdna/gmm.hpp"

namespace pdna {

std::string model_json(const GmmModel<double>& model) {
  using json = nlohmann::json;
  json doc;
  doc["k"] = model.dim();
  doc["lambda"] = model.lambda();
  doc["groups"] = model.group_ids();
  json priors = json::array(), means = json::array(), covs = json::array();
  for (const auto& c : model.classes()) {
    priors.push_back(c.prior);
    means.push_back(std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size()));
    json rows = json::array();
    for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) {
      const Eigen::VectorXd row = c.covariance.row(r).transpose();
      rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    covs.push_back(std::move(rows));
  }
  doc["priors"] = std::move(priors);
  doc["means"] = std::move(means);
  doc["covariances"] = std::move(covs);
  return doc.dump(2) + "\n";
}

std::string dna_csv(const std::vector<DnaVector<double>>& dna, const std::vector<std::string>& group_ids,
                    const std::vector<std::string>& nominal_groups) {
  std::ostringstream out;
  out << "voter_id";
  for (const auto& g : group_ids) out << ',' << g;
  out << ",nominal_group\n";
  char buf[32];
  for (std::size_t i = 0; i < dna.size(); ++i) {
    out << dna[i].voter_id;
    for (Eigen::Index g = 0; g < dna[i].pi.size(); ++g) {
      std::snprintf(buf, sizeof buf, "%.6f", dna[i].pi(g));
      out << ',' << buf;
    }
    out << ',' << (i < nominal_groups.size() ? nominal_groups[i] : std::string()) << '\n';
  }
  return out.str();
}

}  // namespace pdna
