#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pdna {

enum class VoteValue : std::int8_t { No = -1, NotVoting = 0, Yes = 1 };

/// Case-insensitive. Accepts the Italian roll-call labels (Favorevole /
/// Contrario / Assente) as well as yes/no/nv and the numeric codes +1/-1/0.
VoteValue parse_vote(std::string_view text);
std::string_view to_string(VoteValue v) noexcept;

struct Voter {
  std::string id;
  std::size_t group = 0;  // index into VoteDataset::groups

  friend bool operator==(const Voter&, const Voter&) = default;
};

struct Bill {
  std::string id;
  std::string date;  // ISO-8601 (YYYY-MM-DD) or empty
  std::string description;
  bool secret_ballot = false;

  friend bool operator==(const Bill&, const Bill&) = default;
};

/// Labeled roll-call data. Votes are stored densely (voter-major); a pair with
/// no record is NotVoting.
class VoteDataset {
 public:
  VoteDataset() = default;
  VoteDataset(std::vector<std::string> groups, std::vector<Voter> voters, std::vector<Bill> bills);

  const std::vector<std::string>& groups() const noexcept { return groups_; }
  const std::vector<Voter>& voters() const noexcept { return voters_; }
  const std::vector<Bill>& bills() const noexcept { return bills_; }

  std::size_t num_voters() const noexcept { return voters_.size(); }
  std::size_t num_bills() const noexcept { return bills_.size(); }
  std::size_t num_groups() const noexcept { return groups_.size(); }

  VoteValue vote(std::size_t voter, std::size_t bill) const { return votes_[voter * bills_.size() + bill]; }
  void set_vote(std::size_t voter, std::size_t bill, VoteValue v) { votes_[voter * bills_.size() + bill] = v; }

  std::optional<std::size_t> find_voter(std::string_view id) const;
  std::optional<std::size_t> find_bill(std::string_view id) const;
  std::optional<std::size_t> find_group(std::string_view id) const;

  const std::string& group_of(std::size_t voter) const { return groups_[voters_[voter].group]; }

  /// Per-voter group index (the class labels used by the mixture fit).
  std::vector<std::size_t> labels() const;

  /// Returns a dataset restricted to the given voters and bills, in the given
  /// order. Groups left without members are dropped when drop_empty_groups.
  VoteDataset subset(const std::vector<std::size_t>& voter_idx, const std::vector<std::size_t>& bill_idx,
                     bool drop_empty_groups = true) const;

  friend bool operator==(const VoteDataset&, const VoteDataset&) = default;

 private:
  std::vector<std::string> groups_;
  std::vector<Voter> voters_;
  std::vector<Bill> bills_;
  std::vector<VoteValue> votes_;
};

/// Checks id uniqueness and group membership; throws MalformedRecord /
/// UnknownGroup. When require_two_groups, fewer than two groups is malformed.
void validate(const VoteDataset& d, bool require_two_groups = true);

enum class InputFormat { Csv, Json };

struct CsvPaths {
  std::filesystem::path votes;
  std::filesystem::path voters;
  std::optional<std::filesystem::path> bills;  // bills are inferred from votes.csv when absent
};

VoteDataset parse_csv(const CsvPaths& paths);
VoteDataset parse_json(const std::filesystem::path& path);
VoteDataset parse_json_text(std::string_view text);

/// Dispatches on format. For Csv, path is a directory holding votes.csv,
/// voters.csv and (optionally) bills.csv.
VoteDataset parse_dataset(const std::filesystem::path& path, InputFormat format);

void write_csv(const VoteDataset& d, const std::filesystem::path& dir);
std::string to_json_text(const VoteDataset& d);

struct CleaningReport {
  std::size_t secret_bills_removed = 0;
  std::size_t silent_voters_removed = 0;
  std::size_t constant_bills_removed = 0;
  std::size_t empty_groups_removed = 0;
  std::size_t passes = 0;
};

/// Drops secret ballots, never-voting voters and zero-variance bills, iterated
/// to a fixed point. Throws EmptyAfterCleaning.
VoteDataset clean_dataset(const VoteDataset& d, CleaningReport* report = nullptr);

/// Relabels voters of groups with fewer than min_size members into target.
/// Throws UnknownGroup when target is not a group of d.
VoteDataset merge_small_groups(const VoteDataset& d, std::string_view target, std::size_t min_size = 2);

}  // namespace pdna
