#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdna/dataset.hpp"

namespace pdna {

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit Weyl counter advanced by
/// 0x9E3779B97F4A7C15 and passed through the variance-13 finalizer. Streams
/// are keyed by hashing a tuple of integers into the initial counter, so any
/// (seed, bill, voter, ...) coordinate has its own reproducible sequence on
/// every platform. Distributions are implemented here rather than taken from
/// <random>, whose distribution algorithms are implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  /// Stream for a key tuple, e.g. SplitMix64::keyed({seed, bill, voter}).
  static SplitMix64 keyed(std::initializer_list<std::uint64_t> key);

  static std::uint64_t mix(std::uint64_t z) noexcept;

  std::uint64_t next() noexcept;
  double uniform() noexcept;                       // [0, 1), 53 bits
  std::uint64_t below(std::uint64_t n) noexcept;   // unbiased in [0, n)
  double normal() noexcept;                        // Box-Muller, one draw per call

 private:
  std::uint64_t state_;
};

struct BlocParams {
  std::size_t groups = 2;
  std::vector<std::size_t> sizes;  // per group, each >= 2
  std::size_t bills = 10;
  std::vector<double> cohesion;    // one value, or one per group; each in [0.5, 1]
  std::size_t planted_outliers = 0;
  std::uint64_t seed = 0;
};

struct PlantedOutlier {
  std::string voter_id;
  std::string nominal_group;
  std::string voted_group;
};

struct SyntheticBlocs {
  VoteDataset dataset;
  std::vector<PlantedOutlier> planted;
};

/// Each group draws a uniform ternary party line per bill; members follow it
/// with probability `cohesion` and otherwise pick one of the two other values
/// uniformly. A planted outlier replaces one member of its labeled group and
/// follows another group's line. Bills with a single distinct value are
/// redrawn from the next sub-seed. Throws InvalidParameter.
SyntheticBlocs gen_blocs(const BlocParams& params);

struct SyntheticGmm {
  Eigen::MatrixXd points;  // m x k
  std::vector<std::size_t> labels;
  std::vector<std::string> group_ids;
  Eigen::MatrixXd means;   // n_groups x k
};

/// Unit spherical Gaussians whose means are pairwise at least `separation`
/// apart (exactly `separation` on a scaled simplex when k >= n_groups,
/// otherwise evenly spaced along the first axis). Throws InvalidParameter.
SyntheticGmm gen_gmm(std::size_t groups, Eigen::Index k, double separation, const std::vector<std::size_t>& sizes,
                     std::uint64_t seed);

}  // namespace pdna
