#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdna/dataset.hpp"
#include "pdna/gmm.hpp"
#include "pdna/map.hpp"
#include "pdna/outliers.hpp"
#include "pdna/pca.hpp"
#include "pdna/preprocess.hpp"
#include "pdna/spca.hpp"

namespace pdna {

enum class Reduction { Pca, Spca };

struct InputSpec {
  std::optional<std::filesystem::path> json;
  std::optional<std::filesystem::path> votes;
  std::optional<std::filesystem::path> voters;
  std::optional<std::filesystem::path> bills;
};

VoteDataset load_input(const InputSpec& in);

struct ReductionSpec {
  Reduction method = Reduction::Pca;
  int k = 2;
  int p = 10;
  int restarts = 0;
  bool refine = false;
};

struct PipelineConfig {
  InputSpec input;
  ReductionSpec reduction;
  LambdaPolicy lambda = LambdaPolicy::autoselect();
  bool uniform_priors = false;
  std::optional<std::string> merge_small_into;
  std::optional<std::vector<std::string>> map_order;
};

/// Everything computed by one pass of ingest -> clean -> encode/standardize
/// -> reduce -> mixture fit -> DNA -> map.
struct PipelineResult {
  VoteDataset raw;
  VoteDataset dataset;  // cleaned (and merged, when requested)
  CleaningReport cleaning;
  StandardizedMatrix standardized;
  ComponentBasis<double> basis;
  std::vector<SparseFactor<double>> factors;  // sparse runs only
  ProjectedData<double> projected;
  GmmModel<double> model;
  std::vector<DnaVector<double>> dna;
  PolytopeLayout layout;
  std::vector<PoliticalMapPoint> points;
  double expressed_variance = 0;
};

PipelineResult run_pipeline(const PipelineConfig& cfg);
PipelineResult run_pipeline(const PipelineConfig& cfg, VoteDataset raw);

std::vector<std::string> nominal_groups(const VoteDataset& d);

/// Dense bases: bill_id plus one column per component. Sparse bases: one row
/// per (component, bill) in the support, by |loading| descending, with the
/// bill's date and description.
std::string components_csv(const PipelineResult& r);

MapCaption map_caption(const PipelineConfig& cfg, const PipelineResult& r);

/// Run manifest capturing every parameter and data-dependent choice.
std::string manifest_json(const PipelineConfig& cfg, const PipelineResult& r,
                          const std::vector<std::filesystem::path>& artifacts);

/// A set of files committed together: every file is written to a temporary
/// sibling first and renamed into place only after all writes succeeded.
class ArtifactSet {
 public:
  void add(std::filesystem::path path, std::string contents);
  const std::vector<std::pair<std::filesystem::path, std::string>>& files() const noexcept { return files_; }
  std::vector<std::filesystem::path> paths() const;
  void commit() const;

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

}  // namespace pdna
