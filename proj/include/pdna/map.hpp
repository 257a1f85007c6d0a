#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdna/gmm.hpp"

namespace pdna {

/// Groups on the vertices of a regular polygon inscribed in the unit circle.
/// Slot s sits at angle 90 + 360 s / n_g degrees.
struct PolytopeLayout {
  std::vector<std::string> groups;  // dataset order; DNA entries follow it
  std::vector<std::size_t> order;   // order[s] = group placed in slot s
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;  // row g = vertex of groups[g]

  std::size_t size() const noexcept { return groups.size(); }
};

struct PoliticalMapPoint {
  std::string voter_id;
  Eigen::Vector2d gamma = Eigen::Vector2d::Zero();
  std::string nominal_group;
  std::size_t marker = 0;  // index of the nominal group in the layout
  Eigen::VectorXd dna;     // full affinity vector, kept because gamma is lossy for n_g > 3
};

/// Throws InvalidPermutation when order is not a permutation of groups.
PolytopeLayout layout_groups(const std::vector<std::string>& groups,
                             const std::optional<std::vector<std::string>>& order = std::nullopt);

/// gamma = sum_l pi_l a_l. Throws OrderMismatch when the DNA length differs
/// from the layout.
PoliticalMapPoint map_point(const PolytopeLayout& layout, const DnaVector<double>& dna,
                            const std::string& nominal_group = {});

/// As above, also checking that the DNA entries follow the layout's groups.
PoliticalMapPoint map_point(const PolytopeLayout& layout, const DnaVector<double>& dna,
                            const std::vector<std::string>& dna_groups, const std::string& nominal_group);

struct MapCaption {
  std::string method;  // "PCA" / "Sparse PCA"
  int k = 0;
  std::optional<int> p;
  double expressed_variance = 0;
};

enum class MapFormat { Svg, Csv };

std::string map_svg(const std::vector<PoliticalMapPoint>& points, const PolytopeLayout& layout, const MapCaption& caption);
std::string map_csv(const std::vector<PoliticalMapPoint>& points, const PolytopeLayout& layout);
std::vector<PoliticalMapPoint> parse_map_csv(const std::string& text, const PolytopeLayout& layout);

/// Writes the SVG or CSV rendering. Throws InvalidArgument on an empty point
/// list and IoError when the file cannot be written.
void render_map(const std::vector<PoliticalMapPoint>& points, const PolytopeLayout& layout,
                const std::filesystem::path& out, MapFormat format, const MapCaption& caption = {});

/// Fixed 10-entry palette; group g uses entry g % 10.
const std::vector<std::string>& map_palette();

}  // namespace pdna
