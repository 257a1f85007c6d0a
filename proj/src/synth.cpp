#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pdna/error.hpp"
#include "pdna/synth.hpp"

namespace pdna {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// stream tags
constexpr std::uint64_t kLineTag = 0x4C494E45;   // "LINE"
constexpr std::uint64_t kPlantTag = 0x504C4E54;  // "PLNT"
constexpr std::uint64_t kVoteTag = 0x564F5445;   // "VOTE"
constexpr std::uint64_t kGmmTag = 0x474D4D00;    // "GMM"

constexpr int kMaxBillAttempts = 10000;
constexpr int kMaxDatasetAttempts = 100;

int vote_code(std::uint64_t r) { return static_cast<int>(r) - 1; }  // 0,1,2 -> -1,0,+1

std::string padded(const char* prefix, std::size_t i, std::size_t total) {
  const int width = std::max(3, static_cast<int>(std::to_string(total).size()));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

std::string iso_date(int offset_days) {
  using namespace std::chrono;
  const sys_days start = year{2013} / March / 15;
  const year_month_day ymd{start + days{offset_days}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

std::uint64_t SplitMix64::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SplitMix64 SplitMix64::keyed(std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (std::uint64_t k : key) h = mix(h + kGamma + mix(k));
  return SplitMix64(h);
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += kGamma;
  return mix(state_);
}

double SplitMix64::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t SplitMix64::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do r = next();
  while (r >= limit);
  return r % n;
}

double SplitMix64::normal() noexcept {
  double u1;
  do u1 = uniform();
  while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SyntheticBlocs gen_blocs(const BlocParams& p) {
  if (p.groups < 1) throw Error(ErrorCode::InvalidParameter, "need at least one group");
  if (p.sizes.size() != p.groups)
    throw Error(ErrorCode::InvalidParameter,
                std::to_string(p.sizes.size()) + " sizes given for " + std::to_string(p.groups) + " groups");
  for (std::size_t s : p.sizes)
    if (s < 2) throw Error(ErrorCode::InvalidParameter, "group sizes must be at least 2");
  if (p.bills < 1) throw Error(ErrorCode::InvalidParameter, "need at least one bill");
  if (p.cohesion.size() != 1 && p.cohesion.size() != p.groups)
    throw Error(ErrorCode::InvalidParameter, "give one cohesion value or one per group");
  for (double c : p.cohesion)
    if (!(c >= 0.5 && c <= 1.0)) throw Error(ErrorCode::InvalidParameter, "cohesion must lie in [0.5, 1]");
  if (p.planted_outliers > 0 && p.groups < 2)
    throw Error(ErrorCode::InvalidParameter, "planted outliers need at least two groups");

  std::vector<std::string> group_ids;
  for (std::size_t g = 0; g < p.groups; ++g) group_ids.push_back("G" + std::to_string(g + 1));

  // planted outliers are extra voters labeled g who follow another group's
  // line; they are appended after the genuine members of g
  std::vector<PlantedOutlier> planted;
  std::vector<std::size_t> plant_follow;
  std::vector<std::size_t> plant_group;
  {
    auto rng = SplitMix64::keyed({p.seed, kPlantTag});
    for (std::size_t t = 0; t < p.planted_outliers; ++t) {
      const std::size_t g = rng.below(p.groups);
      const std::size_t h = (g + 1 + rng.below(p.groups - 1)) % p.groups;
      plant_group.push_back(g);
      plant_follow.push_back(h);
    }
  }
  std::size_t m = p.planted_outliers;
  for (std::size_t s : p.sizes) m += s;
  std::vector<Voter> voters;
  std::vector<std::size_t> follows;
  for (std::size_t g = 0; g < p.groups; ++g) {
    for (std::size_t t = 0; t < p.sizes[g]; ++t) {
      voters.push_back(Voter{padded("v", voters.size() + 1, m), g});
      follows.push_back(g);
    }
    for (std::size_t t = 0; t < p.planted_outliers; ++t)
      if (plant_group[t] == g) {
        voters.push_back(Voter{padded("v", voters.size() + 1, m), g});
        follows.push_back(plant_follow[t]);
        planted.push_back(PlantedOutlier{voters.back().id, group_ids[g], group_ids[plant_follow[t]]});
      }
  }

  auto cohesion_of = [&](std::size_t g) { return p.cohesion.size() == 1 ? p.cohesion[0] : p.cohesion[g]; };

  std::vector<Bill> bills;
  for (std::size_t j = 0; j < p.bills; ++j)
    bills.push_back(Bill{padded("b", j + 1, p.bills), iso_date(static_cast<int>(7 * j)),
                         "Synthetic bill " + std::to_string(j + 1), false});

  for (int round = 0; round < kMaxDatasetAttempts; ++round) {
    VoteDataset d(group_ids, voters, bills);
    for (std::size_t j = 0; j < p.bills; ++j) {
      bool varied = false;
      for (int attempt = 0; attempt < kMaxBillAttempts && !varied; ++attempt) {
        auto line_rng = SplitMix64::keyed({p.seed, kLineTag, static_cast<std::uint64_t>(round), j,
                                           static_cast<std::uint64_t>(attempt)});
        std::vector<int> line(p.groups);
        for (auto& v : line) v = vote_code(line_rng.below(3));
        for (std::size_t i = 0; i < m; ++i) {
          auto rng = SplitMix64::keyed({p.seed, kVoteTag, static_cast<std::uint64_t>(round), j,
                                        static_cast<std::uint64_t>(attempt), i});
          const int party = line[follows[i]];
          int v = party;
          if (rng.uniform() >= cohesion_of(follows[i])) {
            // one of the two other values, uniformly
            const int others[3][2] = {{0, 1}, {-1, 1}, {-1, 0}};
            v = others[party + 1][rng.below(2)];
          }
          d.set_vote(i, j, static_cast<VoteValue>(v));
        }
        varied = false;
        for (std::size_t i = 1; i < m && !varied; ++i) varied = d.vote(i, j) != d.vote(0, j);
      }
      if (!varied) throw Error(ErrorCode::InvalidParameter, "could not draw a non-constant bill");
    }
    bool all_voted = true;
    for (std::size_t i = 0; i < m && all_voted; ++i) {
      bool voted = false;
      for (std::size_t j = 0; j < p.bills && !voted; ++j) voted = d.vote(i, j) != VoteValue::NotVoting;
      all_voted = voted;
    }
    if (all_voted) return SyntheticBlocs{std::move(d), std::move(planted)};
  }
  throw Error(ErrorCode::InvalidParameter, "could not draw a dataset in which every voter votes");
}

SyntheticGmm gen_gmm(std::size_t groups, Eigen::Index k, double separation, const std::vector<std::size_t>& sizes,
                     std::uint64_t seed) {
  if (groups < 1) throw Error(ErrorCode::InvalidParameter, "need at least one group");
  if (k < 1) throw Error(ErrorCode::InvalidParameter, "dimension must be at least 1");
  if (!(separation >= 0)) throw Error(ErrorCode::InvalidParameter, "separation must be non-negative");
  if (sizes.size() != groups) throw Error(ErrorCode::InvalidParameter, "one size per group required");

  SyntheticGmm out;
  out.means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(groups), k);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto r = static_cast<Eigen::Index>(g);
    if (k >= static_cast<Eigen::Index>(groups))
      out.means(r, r) = separation / std::numbers::sqrt2;
    else
      out.means(r, 0) = separation * static_cast<double>(g);
    out.group_ids.push_back("C" + std::to_string(g + 1));
  }

  std::size_t m = 0;
  for (std::size_t s : sizes) m += s;
  out.points.resize(static_cast<Eigen::Index>(m), k);
  std::size_t row = 0;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t t = 0; t < sizes[g]; ++t, ++row) {
      auto rng = SplitMix64::keyed({seed, kGmmTag, g, t});
      for (Eigen::Index c = 0; c < k; ++c)
        out.points(static_cast<Eigen::Index>(row), c) = out.means(static_cast<Eigen::Index>(g), c) + rng.normal();
      out.labels.push_back(g);
    }
  return out;
}

}  // namespace pdna
