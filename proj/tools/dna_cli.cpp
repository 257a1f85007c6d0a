// dna: command-line front end for the affinity pipeline.
//
//   dna fit --votes votes.csv --voters voters.csv --bills bills.csv --out run/
//   dna dna --json data.json --reduce spca --k 2 --p 50 --dump-dna dna.csv
//   dna map --json data.json --map map.svg --map-order "G2,G1,G3"
//   dna components --json data.json --reduce spca --k 10 --p 10 --dump-components bills.csv
//   dna outliers --json data.json --k 10 --p 50 --report outliers.json
//   dna synth --groups 4 --sizes 20,20,20,5 --bills 60 --cohesion 0.9 --outliers 2 --seed 7 --out data/

#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdna/pipeline.hpp"
#include "pdna/synth.hpp"
#include "pdna/version.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

constexpr const char* kSchemas = R"(Input formats
  CSV (UTF-8, header row required, RFC 4180 quoting):
    votes.csv   voter_id,bill_id,vote      vote: Yes|No|NV, Favorevole|Contrario|Assente, +1|-1|0
    voters.csv  voter_id,group
    bills.csv   bill_id,date,description,secret   date YYYY-MM-DD, secret 0|1 (optional file)
  JSON: {"groups": [...optional order...],
         "voters": [{"voter_id", "group"}],
         "bills":  [{"bill_id", "date", "description", "secret"}],
         "votes":  [{"voter_id", "bill_id", "vote"}]}
  Missing (voter, bill) pairs count as not voting.

Outputs
  --dump-dna         voter_id,<group...>,nominal_group  (probabilities, 6 decimals)
  --dump-model       JSON: k, lambda, groups, priors, means, covariances
  --dump-components  pca: bill_id,pc1..pck   spca: component,bill_id,loading,date,description
  --dump-standardized voter_id,<bill ids...> (12 significant digits)
  --map / --map-csv  SVG figure / voter_id,gamma_x,gamma_y,nominal_group,pi_<group...>
  --manifest         JSON record of parameters, cleaning counts, lambda and E-Var

Config file (--config run.toml): top-level key = value lines using the long
option names, e.g.  reduce = "spca"  k = 2  p = 50  lambda = "auto".
Command-line flags override the file.

Exit status: 0 success, 2 input error, 3 numerical error.)";

struct Options {
  pdna::PipelineConfig cfg;
  std::string reduce = "pca";
  std::string lambda = "auto";
  std::string map_order;
  std::string out_dir;
  std::string dump_standardized, dump_components, dump_dna, dump_model, map_svg, map_csv, manifest;
  // outliers
  std::string report;
  std::string dna_reduce = "pca";
  int dna_k = 2;
  int dna_p = 50;
  // synth
  std::size_t groups = 4;
  std::vector<std::size_t> sizes;
  std::size_t bills = 60;
  std::vector<double> cohesion{0.9};
  std::size_t outliers = 0;
  std::uint64_t seed = 0;
  std::string synth_format = "csv";
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

pdna::Reduction parse_reduce(const std::string& s) {
  if (s == "pca") return pdna::Reduction::Pca;
  if (s == "spca") return pdna::Reduction::Spca;
  throw pdna::Error(pdna::ErrorCode::InvalidArgument, "--reduce must be pca or spca");
}

void finalize(Options& o) {
  o.cfg.reduction.method = parse_reduce(o.reduce);
  if (o.lambda == "auto") {
    o.cfg.lambda = pdna::LambdaPolicy::autoselect();
  } else {
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(o.lambda, &used);
      if (used != o.lambda.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw pdna::Error(pdna::ErrorCode::InvalidArgument, "--lambda must be 'auto' or a non-negative number");
    }
    o.cfg.lambda = pdna::LambdaPolicy::fixed(v);
  }
  if (!o.map_order.empty()) o.cfg.map_order = split_list(o.map_order);
}

void add_standard_outputs(pdna::ArtifactSet& set, const Options& o, const pdna::PipelineResult& r) {
  if (!o.dump_standardized.empty()) set.add(o.dump_standardized, pdna::standardized_csv(r.standardized));
  if (!o.dump_components.empty()) set.add(o.dump_components, pdna::components_csv(r));
  if (!o.dump_dna.empty()) set.add(o.dump_dna, pdna::dna_csv(r.dna, r.model.group_ids(), pdna::nominal_groups(r.dataset)));
  if (!o.dump_model.empty()) set.add(o.dump_model, pdna::model_json(r.model));
  if (!o.map_svg.empty()) set.add(o.map_svg, pdna::map_svg(r.points, r.layout, pdna::map_caption(o.cfg, r)));
  if (!o.map_csv.empty()) set.add(o.map_csv, pdna::map_csv(r.points, r.layout));
}

void add_manifest(pdna::ArtifactSet& set, const Options& o, const pdna::PipelineResult& r, std::string path) {
  if (path.empty()) return;
  auto files = set.paths();
  files.push_back(path);
  set.add(path, pdna::manifest_json(o.cfg, r, files));
}

int run_fit(const Options& o) {
  const auto r = pdna::run_pipeline(o.cfg);
  pdna::ArtifactSet set;
  std::string manifest = o.manifest;
  if (!o.out_dir.empty()) {
    const std::filesystem::path dir(o.out_dir);
    set.add(dir / "dna.csv", pdna::dna_csv(r.dna, r.model.group_ids(), pdna::nominal_groups(r.dataset)));
    set.add(dir / "model.json", pdna::model_json(r.model));
    set.add(dir / "components.csv", pdna::components_csv(r));
    set.add(dir / "map.svg", pdna::map_svg(r.points, r.layout, pdna::map_caption(o.cfg, r)));
    set.add(dir / "map.csv", pdna::map_csv(r.points, r.layout));
    if (manifest.empty()) manifest = (dir / "manifest.json").string();
  }
  add_standard_outputs(set, o, r);
  add_manifest(set, o, r, manifest);
  set.commit();
  std::cout << "voters=" << r.dataset.num_voters() << " bills=" << r.dataset.num_bills()
            << " groups=" << r.dataset.num_groups() << " lambda=" << r.model.lambda()
            << " E-Var=" << r.expressed_variance << '\n';
  return 0;
}

int run_simple(const Options& o, const std::string& required, const char* flag) {
  if (required.empty()) throw pdna::Error(pdna::ErrorCode::InvalidArgument, std::string(flag) + " is required");
  const auto r = pdna::run_pipeline(o.cfg);
  pdna::ArtifactSet set;
  add_standard_outputs(set, o, r);
  add_manifest(set, o, r, o.manifest);
  set.commit();
  return 0;
}

int run_outliers(const Options& o) {
  if (o.report.empty()) throw pdna::Error(pdna::ErrorCode::InvalidArgument, "--report is required");
  // DNA for the report comes from a separate fit with its own reduction.
  pdna::PipelineConfig dna_cfg = o.cfg;
  dna_cfg.reduction.method = parse_reduce(o.dna_reduce);
  dna_cfg.reduction.k = o.dna_k;
  dna_cfg.reduction.p = o.dna_p;
  const auto r = pdna::run_pipeline(dna_cfg);

  pdna::SpcaOptions sopt;
  sopt.restarts = o.cfg.reduction.restarts;
  sopt.refine = o.cfg.reduction.refine;
  const auto analysis = pdna::outlier_pipeline(r.dataset, o.cfg.reduction.k, o.cfg.reduction.p, sopt);
  const auto report = pdna::outlier_report(analysis.components, r.dna, r.model.group_ids());

  pdna::ArtifactSet set;
  set.add(o.report, pdna::outlier_json(analysis, report));
  add_standard_outputs(set, o, r);
  add_manifest(set, o, r, o.manifest);
  set.commit();
  for (const auto& c : analysis.components)
    std::cout << "PC" << c.component << ": " << c.dominant_group << " " << 100 * c.dominant_fraction << "% ("
              << c.support.size() << " voters, " << c.outliers.size() << " outliers)\n";
  return 0;
}

int run_synth(const Options& o) {
  if (o.out_dir.empty()) throw pdna::Error(pdna::ErrorCode::InvalidArgument, "--out is required");
  pdna::BlocParams p;
  p.groups = o.groups;
  p.sizes = o.sizes.empty() ? std::vector<std::size_t>(o.groups, 20) : o.sizes;
  p.bills = o.bills;
  p.cohesion = o.cohesion;
  p.planted_outliers = o.outliers;
  p.seed = o.seed;
  const auto s = pdna::gen_blocs(p);

  const std::filesystem::path dir(o.out_dir);
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& pl : s.planted)
    truth.push_back({{"voter_id", pl.voter_id}, {"nominal_group", pl.nominal_group}, {"voted_group", pl.voted_group}});
  if (o.synth_format == "json") {
    pdna::ArtifactSet set;
    set.add(dir / "dataset.json", pdna::to_json_text(s.dataset));
    set.add(dir / "planted.json", truth.dump(2) + "\n");
    set.commit();
  } else if (o.synth_format == "csv") {
    pdna::write_csv(s.dataset, dir);
    pdna::ArtifactSet set;
    set.add(dir / "planted.json", truth.dump(2) + "\n");
    set.commit();
  } else {
    throw pdna::Error(pdna::ErrorCode::InvalidArgument, "--format must be csv or json");
  }
  std::cout << "wrote " << s.dataset.num_voters() << " voters x " << s.dataset.num_bills() << " bills to " << dir.string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affinity of voters to groups from roll-call records (Gaussian-mixture posteriors over (sparse) PCA)"};
  app.footer(kSchemas);
  app.set_version_flag("--version", pdna::kVersion);
  app.set_config("--config", "", "TOML-style key = value file with default option values");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  auto& cfg = o.cfg;

  auto* in = app.add_option_group("Input");
  in->add_option("--json", cfg.input.json, "Dataset as a single JSON document");
  in->add_option("--votes", cfg.input.votes, "votes.csv");
  in->add_option("--voters", cfg.input.voters, "voters.csv");
  in->add_option("--bills", cfg.input.bills, "bills.csv (optional)");

  auto* model = app.add_option_group("Model");
  model->add_option("--reduce", o.reduce, "Dimensionality reduction: pca or spca")->capture_default_str();
  model->add_option("--k", cfg.reduction.k, "Number of components")->capture_default_str()->check(CLI::PositiveNumber);
  model->add_option("--p", cfg.reduction.p, "Nonzeros per sparse component")->capture_default_str()->check(CLI::PositiveNumber);
  model->add_option("--restarts", cfg.reduction.restarts, "Extra sparse PCA starts from the largest-norm coordinates")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  model->add_flag("--refine", cfg.reduction.refine, "Polish each sparse component by single-coordinate support swaps");
  model->add_option("--lambda", o.lambda, "Covariance shrinkage: 'auto' or a non-negative number")->capture_default_str();
  model->add_flag("--uniform-priors", cfg.uniform_priors, "Use equal group priors instead of group frequencies");
  model->add_option("--merge-small-into", cfg.merge_small_into, "Fold groups with fewer than 2 voters into this group");
  model->add_option("--map-order", o.map_order, "Comma-separated group order around the polygon");

  auto* outg = app.add_option_group("Outputs");
  outg->add_option("--dump-standardized", o.dump_standardized, "Standardized vote matrix CSV");
  outg->add_option("--dump-components", o.dump_components, "Component loadings CSV");
  outg->add_option("--dump-dna", o.dump_dna, "Affinity (DNA) CSV");
  outg->add_option("--dump-model", o.dump_model, "Fitted mixture model JSON");
  outg->add_option("--map", o.map_svg, "Political map SVG");
  outg->add_option("--map-csv", o.map_csv, "Political map coordinates CSV");
  outg->add_option("--manifest", o.manifest, "Run manifest JSON");

  auto* fit = app.add_subcommand("fit", "Run the full pipeline and write every artifact");
  fit->add_option("--out", o.out_dir, "Directory for dna.csv, model.json, components.csv, map.svg, map.csv, manifest.json");
  auto* dna = app.add_subcommand("dna", "Write the affinity vector of every voter (--dump-dna)");
  auto* map = app.add_subcommand("map", "Render the political map (--map, --map-csv)");
  auto* comps = app.add_subcommand("components", "Write component loadings (--dump-components)");
  auto* outl = app.add_subcommand("outliers", "Sparse PCA over voters; report voters outside their component's dominant group");
  outl->add_option("--report", o.report, "Output JSON report");
  outl->add_option("--dna-reduce", o.dna_reduce, "Reduction used for the DNA in the report")->capture_default_str();
  outl->add_option("--dna-k", o.dna_k, "Components used for the DNA in the report")->capture_default_str();
  outl->add_option("--dna-p", o.dna_p, "Sparsity used for the DNA in the report")->capture_default_str();
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic bloc dataset");
  synth->add_option("--groups", o.groups, "Number of groups")->capture_default_str();
  synth->add_option("--sizes", o.sizes, "Voters per group, comma separated (default 20 each)")->delimiter(',');
  synth->add_option("--bills", o.bills, "Number of bills")->capture_default_str();
  synth->add_option("--cohesion", o.cohesion, "Probability of following the party line (one value or one per group)")
      ->delimiter(',');
  synth->add_option("--outliers", o.outliers, "Planted cross-voters")->capture_default_str();
  synth->add_option("--seed", o.seed, "Seed")->capture_default_str();
  synth->add_option("--format", o.synth_format, "csv or json")->capture_default_str();
  synth->add_option("--out", o.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    finalize(o);
    if (fit->parsed()) return run_fit(o);
    if (dna->parsed()) return run_simple(o, o.dump_dna, "--dump-dna");
    if (map->parsed()) return run_simple(o, o.map_svg.empty() ? o.map_csv : o.map_svg, "--map");
    if (comps->parsed()) return run_simple(o, o.dump_components, "--dump-components");
    if (outl->parsed()) return run_outliers(o);
    if (synth->parsed()) return run_synth(o);
  } catch (const pdna::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == pdna::ErrorCategory::Numerical ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
