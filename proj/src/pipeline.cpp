#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pdna/pipeline.hpp"
#include "pdna/version.hpp"

namespace pdna {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v, const char* f = "%.12g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

VoteDataset load_input(const InputSpec& in) {
  if (in.json) {
    if (in.votes || in.voters || in.bills)
      throw Error(ErrorCode::InvalidArgument, "use either --json or --votes/--voters/--bills, not both");
    return parse_json(*in.json);
  }
  if (!in.votes || !in.voters) throw Error(ErrorCode::InvalidArgument, "input requires --json, or --votes and --voters");
  return parse_csv(CsvPaths{*in.votes, *in.voters, in.bills});
}

std::vector<std::string> nominal_groups(const VoteDataset& d) {
  std::vector<std::string> out;
  out.reserve(d.num_voters());
  for (std::size_t i = 0; i < d.num_voters(); ++i) out.push_back(d.group_of(i));
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) { return run_pipeline(cfg, load_input(cfg.input)); }

PipelineResult run_pipeline(const PipelineConfig& cfg, VoteDataset raw) {
  PipelineResult r;
  r.raw = std::move(raw);
  r.dataset = clean_dataset(r.raw, &r.cleaning);
  if (cfg.merge_small_into) r.dataset = merge_small_groups(r.dataset, *cfg.merge_small_into);

  r.standardized = standardize(encode(r.dataset));
  const auto& rs = cfg.reduction;
  if (rs.method == Reduction::Pca) {
    r.basis = pca_fit(r.standardized, rs.k);
  } else {
    SpcaOptions opt;
    opt.restarts = rs.restarts;
    opt.refine = rs.refine;
    r.basis = spca_fit(r.standardized.values, rs.k, rs.p, opt, &r.factors);
  }
  r.projected = project(r.standardized, r.basis);
  r.expressed_variance = expressed_variance(r.standardized, r.basis);

  GmmFitOptions gopt;
  gopt.lambda = cfg.lambda;
  gopt.uniform_priors = cfg.uniform_priors;
  r.model = gmm_fit(r.projected.values, r.dataset.labels(), r.dataset.groups(), gopt);
  r.dna = dna_all(r.model, r.projected);

  r.layout = layout_groups(r.dataset.groups(), cfg.map_order);
  for (std::size_t i = 0; i < r.dna.size(); ++i)
    r.points.push_back(map_point(r.layout, r.dna[i], r.model.group_ids(), r.dataset.group_of(i)));
  return r;
}

std::string components_csv(const PipelineResult& r) {
  std::ostringstream out;
  const auto& b = r.basis;
  const auto& bills = r.dataset.bills();
  if (b.kind == BasisKind::Dense) {
    out << "bill_id";
    for (Eigen::Index c = 0; c < b.size(); ++c) out << ",pc" << c + 1;
    out << '\n';
    for (Eigen::Index j = 0; j < b.dim(); ++j) {
      out << csv_field(bills[static_cast<std::size_t>(j)].id);
      for (Eigen::Index c = 0; c < b.size(); ++c) out << ',' << num(b.directions(j, c));
      out << '\n';
    }
    return out.str();
  }
  out << "component,bill_id,loading,date,description\n";
  for (Eigen::Index c = 0; c < b.size(); ++c) {
    const Eigen::VectorXd v = b.directions.col(c);
    std::vector<Eigen::Index> s = support_of(v);
    std::stable_sort(s.begin(), s.end(), [&](Eigen::Index a, Eigen::Index bb) { return std::abs(v(a)) > std::abs(v(bb)); });
    for (Eigen::Index j : s) {
      const auto& bill = bills[static_cast<std::size_t>(j)];
      out << c + 1 << ',' << csv_field(bill.id) << ',' << num(v(j)) << ',' << bill.date << ','
          << csv_field(bill.description) << '\n';
    }
  }
  return out.str();
}

MapCaption map_caption(const PipelineConfig& cfg, const PipelineResult& r) {
  MapCaption cap;
  cap.method = cfg.reduction.method == Reduction::Pca ? "PCA" : "Sparse PCA";
  cap.k = cfg.reduction.k;
  if (cfg.reduction.method == Reduction::Spca) cap.p = cfg.reduction.p;
  cap.expressed_variance = r.expressed_variance;
  return cap;
}

std::string manifest_json(const PipelineConfig& cfg, const PipelineResult& r,
                          const std::vector<std::filesystem::path>& artifacts) {
  using json = nlohmann::json;
  json doc;
  doc["tool"] = {{"name", "pdna"}, {"version", kVersion}};

  json input;
  if (cfg.input.json) input["json"] = cfg.input.json->generic_string();
  if (cfg.input.votes) input["votes"] = cfg.input.votes->generic_string();
  if (cfg.input.voters) input["voters"] = cfg.input.voters->generic_string();
  if (cfg.input.bills) input["bills"] = cfg.input.bills->generic_string();
  doc["input"] = input;

  doc["data"] = {{"raw_voters", r.raw.num_voters()},
                 {"raw_bills", r.raw.num_bills()},
                 {"voters", r.dataset.num_voters()},
                 {"bills", r.dataset.num_bills()},
                 {"groups", r.dataset.groups()}};
  doc["cleaning"] = {{"secret_bills_removed", r.cleaning.secret_bills_removed},
                     {"silent_voters_removed", r.cleaning.silent_voters_removed},
                     {"constant_bills_removed", r.cleaning.constant_bills_removed},
                     {"empty_groups_removed", r.cleaning.empty_groups_removed},
                     {"passes", r.cleaning.passes}};
  if (cfg.merge_small_into) doc["merge_small_into"] = *cfg.merge_small_into;

  json red = {{"method", cfg.reduction.method == Reduction::Pca ? "pca" : "spca"}, {"k", cfg.reduction.k}};
  if (cfg.reduction.method == Reduction::Spca) {
    red["p"] = cfg.reduction.p;
    red["restarts"] = cfg.reduction.restarts;
    red["refine"] = cfg.reduction.refine;
    json comps = json::array();
    for (const auto& f : r.factors)
      comps.push_back({{"sigma", f.sigma},
                       {"support_size", f.support.size()},
                       {"iterations", f.iterations},
                       {"converged", f.converged},
                       {"start", f.start}});
    red["components"] = comps;
  }
  red["singular_values"] =
      std::vector<double>(r.basis.singular_values.data(), r.basis.singular_values.data() + r.basis.singular_values.size());
  red["expressed_variance"] = r.expressed_variance;
  doc["reduction"] = red;

  doc["gmm"] = {{"lambda_policy", cfg.lambda.automatic ? "auto" : "fixed"},
                {"lambda", r.model.lambda()},
                {"uniform_priors", cfg.uniform_priors}};
  json order = json::array();
  for (std::size_t g : r.layout.order) order.push_back(r.layout.groups[g]);
  doc["map_order"] = order;

  json files = json::array();
  for (const auto& a : artifacts) files.push_back(a.filename().generic_string());
  doc["artifacts"] = files;
  return doc.dump(2) + "\n";
}

void ArtifactSet::add(std::filesystem::path path, std::string contents) {
  for (auto& f : files_)
    if (f.first == path) {
      f.second = std::move(contents);
      return;
    }
  files_.emplace_back(std::move(path), std::move(contents));
}

std::vector<std::filesystem::path> ArtifactSet::paths() const {
  std::vector<std::filesystem::path> out;
  for (const auto& f : files_) out.push_back(f.first);
  return out;
}

void ArtifactSet::commit() const {
  std::vector<std::filesystem::path> staged;
  auto discard = [&] {
    std::error_code ec;
    for (const auto& t : staged) std::filesystem::remove(t, ec);
  };
  for (const auto& [path, contents] : files_) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::filesystem::path tmp = path;
    tmp += ".pdna-tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) out << contents;
    out.close();
    staged.push_back(tmp);
    if (!out) {
      discard();
      throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
  }
  // a directory in the way would only fail at rename time, after earlier
  // files were already moved; catch it while nothing is visible yet
  for (const auto& [path, contents] : files_) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
      discard();
      throw Error(ErrorCode::IoError, "cannot write " + path.string() + ": is a directory");
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(staged[i], files_[i].first, ec);
    if (ec) {
      discard();
      throw Error(ErrorCode::IoError, "cannot rename into " + files_[i].first.string() + ": " + ec.message());
    }
  }
}

}  // namespace pdna
