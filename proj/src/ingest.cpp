#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pdna/dataset.hpp"
#include "pdna/error.hpp"

namespace pdna {

namespace {

using json = nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int y = std::stoi(std::string(s.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180: quoted fields may contain separators, doubled quotes and newlines.
std::vector<CsvRow> split_csv(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  row.line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          row.fields.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row = CsvRow{};
        any = false;
        row.line = ++line;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedRecord, source + ":" + std::to_string(line) + ": unterminated quote");
  if (any || !field.empty()) {
    row.fields.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

class CsvTable {
 public:
  CsvTable(const std::filesystem::path& path, std::initializer_list<std::string_view> required) : source_(path.string()) {
    auto rows = split_csv(read_file(path), source_);
    if (rows.empty()) throw Error(ErrorCode::MalformedRecord, source_ + ": empty file (header row required)");
    const auto& header = rows.front().fields;
    for (std::string_view name : required) {
      auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return lower(trim(h)) == name; });
      if (it == header.end())
        throw Error(ErrorCode::MalformedRecord, source_ + ":1: missing column '" + std::string(name) + "'");
      columns_.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    width_ = header.size();
    rows_.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
    for (const auto& r : rows_)
      if (r.fields.size() != width_)
        throw Error(ErrorCode::MalformedRecord, where(r) + ": expected " + std::to_string(width_) + " fields, got " +
                                                    std::to_string(r.fields.size()));
  }

  const std::vector<CsvRow>& rows() const { return rows_; }
  std::string field(const CsvRow& r, std::size_t required_index) const {
    return std::string(trim(r.fields[columns_[required_index]]));
  }
  std::string where(const CsvRow& r) const { return source_ + ":" + std::to_string(r.line); }

 private:
  std::string source_;
  std::vector<std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<CsvRow> rows_;
};

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Shared record assembly for both input formats.
class DatasetBuilder {
 public:
  void add_group(const std::string& g, const std::string& where) {
    if (group_index_.count(g)) throw Error(ErrorCode::MalformedRecord, where + ": duplicate group '" + g + "'");
    group_index_.emplace(g, groups_.size());
    groups_.push_back(g);
  }
  void fix_groups() { groups_fixed_ = true; }

  void add_voter(const std::string& id, const std::string& group, const std::string& where) {
    if (id.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty voter_id");
    if (group.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty group");
    if (voter_index_.count(id)) throw Error(ErrorCode::MalformedRecord, where + ": duplicate voter_id '" + id + "'");
    auto it = group_index_.find(group);
    if (it == group_index_.end()) {
      if (groups_fixed_) throw Error(ErrorCode::UnknownGroup, where + ": group '" + group + "' not declared");
      add_group(group, where);
      it = group_index_.find(group);
    }
    voter_index_.emplace(id, voters_.size());
    voters_.push_back(Voter{id, it->second});
  }

  void add_bill(Bill b, const std::string& where) {
    if (b.id.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty bill_id");
    if (bill_index_.count(b.id)) throw Error(ErrorCode::MalformedRecord, where + ": duplicate bill_id '" + b.id + "'");
    if (!b.date.empty() && !is_iso_date(b.date))
      throw Error(ErrorCode::MalformedRecord, where + ": date '" + b.date + "' is not YYYY-MM-DD");
    bill_index_.emplace(b.id, bills_.size());
    bills_.push_back(std::move(b));
  }
  void set_infer_bills(bool v) { infer_bills_ = v; }

  void add_vote(const std::string& voter, const std::string& bill, const std::string& vote, const std::string& where) {
    auto vi = voter_index_.find(voter);
    if (vi == voter_index_.end()) throw Error(ErrorCode::MalformedRecord, where + ": unknown voter_id '" + voter + "'");
    auto bi = bill_index_.find(bill);
    if (bi == bill_index_.end()) {
      if (!infer_bills_) throw Error(ErrorCode::MalformedRecord, where + ": unknown bill_id '" + bill + "'");
      add_bill(Bill{bill, "", "", false}, where);
      bi = bill_index_.find(bill);
    }
    VoteValue v;
    try {
      v = parse_vote(vote);
    } catch (const Error& e) {
      throw Error(ErrorCode::UnknownVoteString, where + ": " + e.detail());
    }
    if (!seen_.emplace(vi->second, bi->second).second)
      throw Error(ErrorCode::DuplicateVote, where + ": second vote for (" + voter + ", " + bill + ")");
    votes_.push_back({vi->second, bi->second, v});
  }

  VoteDataset build(const std::string& source) {
    if (voters_.empty()) throw Error(ErrorCode::MalformedRecord, source + ": no voters");
    if (bills_.empty()) throw Error(ErrorCode::MalformedRecord, source + ": no bills");
    VoteDataset d(groups_, voters_, bills_);
    for (const auto& r : votes_) d.set_vote(r.voter, r.bill, r.value);
    validate(d);
    return d;
  }

 private:
  struct Record {
    std::size_t voter, bill;
    VoteValue value;
  };
  std::vector<std::string> groups_;
  std::unordered_map<std::string, std::size_t> group_index_;
  bool groups_fixed_ = false;
  std::vector<Voter> voters_;
  std::unordered_map<std::string, std::size_t> voter_index_;
  std::vector<Bill> bills_;
  std::unordered_map<std::string, std::size_t> bill_index_;
  bool infer_bills_ = false;
  std::set<std::pair<std::size_t, std::size_t>> seen_;
  std::vector<Record> votes_;
};

bool parse_secret(std::string_view s, const std::string& where) {
  const std::string v = lower(trim(s));
  if (v == "0" || v == "false" || v.empty()) return false;
  if (v == "1" || v == "true") return true;
  throw Error(ErrorCode::MalformedRecord, where + ": secret must be 0 or 1, got '" + std::string(s) + "'");
}

std::string json_string(const json& obj, const char* key, const std::string& where, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw Error(ErrorCode::MalformedRecord, where + ": missing field '" + key + "'");
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw Error(ErrorCode::MalformedRecord, where + ": field '" + key + "' must be a string");
}

}  // namespace

VoteValue parse_vote(std::string_view text) {
  const std::string v = lower(trim(text));
  if (v == "yes" || v == "y" || v == "favorevole" || v == "+1" || v == "1") return VoteValue::Yes;
  if (v == "no" || v == "n" || v == "contrario" || v == "-1") return VoteValue::No;
  if (v == "nv" || v == "notvoting" || v == "not_voting" || v == "not voting" || v == "assente" || v == "0")
    return VoteValue::NotVoting;
  throw Error(ErrorCode::UnknownVoteString, "unrecognized vote '" + std::string(text) + "'");
}

std::string_view to_string(VoteValue v) noexcept {
  switch (v) {
    case VoteValue::Yes: return "Yes";
    case VoteValue::No: return "No";
    case VoteValue::NotVoting: return "NV";
  }
  return "NV";
}

VoteDataset::VoteDataset(std::vector<std::string> groups, std::vector<Voter> voters, std::vector<Bill> bills)
    : groups_(std::move(groups)),
      voters_(std::move(voters)),
      bills_(std::move(bills)),
      votes_(voters_.size() * bills_.size(), VoteValue::NotVoting) {}

std::optional<std::size_t> VoteDataset::find_voter(std::string_view id) const {
  for (std::size_t i = 0; i < voters_.size(); ++i)
    if (voters_[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> VoteDataset::find_bill(std::string_view id) const {
  for (std::size_t j = 0; j < bills_.size(); ++j)
    if (bills_[j].id == id) return j;
  return std::nullopt;
}

std::optional<std::size_t> VoteDataset::find_group(std::string_view id) const {
  for (std::size_t g = 0; g < groups_.size(); ++g)
    if (groups_[g] == id) return g;
  return std::nullopt;
}

std::vector<std::size_t> VoteDataset::labels() const {
  std::vector<std::size_t> out;
  out.reserve(voters_.size());
  for (const auto& v : voters_) out.push_back(v.group);
  return out;
}

VoteDataset VoteDataset::subset(const std::vector<std::size_t>& voter_idx, const std::vector<std::size_t>& bill_idx,
                                bool drop_empty_groups) const {
  std::vector<std::size_t> remap(groups_.size(), 0);
  std::vector<std::string> groups;
  if (drop_empty_groups) {
    std::vector<bool> used(groups_.size(), false);
    for (std::size_t i : voter_idx) used[voters_[i].group] = true;
    for (std::size_t g = 0; g < groups_.size(); ++g)
      if (used[g]) {
        remap[g] = groups.size();
        groups.push_back(groups_[g]);
      }
  } else {
    groups = groups_;
    for (std::size_t g = 0; g < groups_.size(); ++g) remap[g] = g;
  }
  std::vector<Voter> voters;
  voters.reserve(voter_idx.size());
  for (std::size_t i : voter_idx) voters.push_back(Voter{voters_[i].id, remap[voters_[i].group]});
  std::vector<Bill> bills;
  bills.reserve(bill_idx.size());
  for (std::size_t j : bill_idx) bills.push_back(bills_[j]);

  VoteDataset out(std::move(groups), std::move(voters), std::move(bills));
  for (std::size_t a = 0; a < voter_idx.size(); ++a)
    for (std::size_t b = 0; b < bill_idx.size(); ++b) out.set_vote(a, b, vote(voter_idx[a], bill_idx[b]));
  return out;
}

void validate(const VoteDataset& d, bool require_two_groups) {
  if (require_two_groups && d.num_groups() < 2)
    throw Error(ErrorCode::MalformedRecord,
                "at least two groups are required, found " + std::to_string(d.num_groups()));
  std::set<std::string_view> ids;
  for (const auto& g : d.groups())
    if (!ids.insert(g).second) throw Error(ErrorCode::MalformedRecord, "duplicate group '" + g + "'");
  ids.clear();
  for (const auto& v : d.voters()) {
    if (!ids.insert(v.id).second) throw Error(ErrorCode::MalformedRecord, "duplicate voter_id '" + v.id + "'");
    if (v.group >= d.num_groups())
      throw Error(ErrorCode::UnknownGroup, "voter '" + v.id + "' has group index " + std::to_string(v.group));
  }
  ids.clear();
  for (const auto& b : d.bills())
    if (!ids.insert(b.id).second) throw Error(ErrorCode::MalformedRecord, "duplicate bill_id '" + b.id + "'");
}

VoteDataset parse_csv(const CsvPaths& paths) {
  DatasetBuilder builder;

  CsvTable voters(paths.voters, {"voter_id", "group"});
  for (const auto& r : voters.rows()) builder.add_voter(voters.field(r, 0), voters.field(r, 1), voters.where(r));

  if (paths.bills) {
    CsvTable bills(*paths.bills, {"bill_id", "date", "description", "secret"});
    for (const auto& r : bills.rows())
      builder.add_bill(Bill{bills.field(r, 0), bills.field(r, 1), bills.field(r, 2),
                            parse_secret(bills.field(r, 3), bills.where(r))},
                       bills.where(r));
  } else {
    builder.set_infer_bills(true);
  }

  CsvTable votes(paths.votes, {"voter_id", "bill_id", "vote"});
  for (const auto& r : votes.rows())
    builder.add_vote(votes.field(r, 0), votes.field(r, 1), votes.field(r, 2), votes.where(r));

  return builder.build(paths.votes.string());
}

VoteDataset parse_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::MalformedRecord, "top-level JSON value must be an object");
  for (const char* key : {"voters", "votes"})
    if (!doc.contains(key) || !doc[key].is_array())
      throw Error(ErrorCode::MalformedRecord, std::string("missing array '") + key + "'");

  DatasetBuilder builder;
  if (doc.contains("groups")) {
    const auto& groups = doc["groups"];
    if (!groups.is_array()) throw Error(ErrorCode::MalformedRecord, "'groups' must be an array");
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!groups[g].is_string()) throw Error(ErrorCode::MalformedRecord, "groups[" + std::to_string(g) + "]: not a string");
      builder.add_group(groups[g].get<std::string>(), "groups[" + std::to_string(g) + "]");
    }
    builder.fix_groups();
  }
  const auto& voters = doc["voters"];
  for (std::size_t i = 0; i < voters.size(); ++i) {
    const std::string where = "voters[" + std::to_string(i) + "]";
    if (!voters[i].is_object()) throw Error(ErrorCode::MalformedRecord, where + ": not an object");
    builder.add_voter(json_string(voters[i], "voter_id", where), json_string(voters[i], "group", where), where);
  }
  if (doc.contains("bills")) {
    const auto& bills = doc["bills"];
    if (!bills.is_array()) throw Error(ErrorCode::MalformedRecord, "'bills' must be an array");
    for (std::size_t j = 0; j < bills.size(); ++j) {
      const std::string where = "bills[" + std::to_string(j) + "]";
      if (!bills[j].is_object()) throw Error(ErrorCode::MalformedRecord, where + ": not an object");
      bool secret = false;
      if (auto it = bills[j].find("secret"); it != bills[j].end()) {
        if (it->is_boolean())
          secret = it->get<bool>();
        else if (it->is_number_integer())
          secret = parse_secret(std::to_string(it->get<long long>()), where);
        else if (it->is_string())
          secret = parse_secret(it->get<std::string>(), where);
        else
          throw Error(ErrorCode::MalformedRecord, where + ": secret must be 0/1 or boolean");
      }
      builder.add_bill(Bill{json_string(bills[j], "bill_id", where), json_string(bills[j], "date", where, false),
                            json_string(bills[j], "description", where, false), secret},
                       where);
    }
  } else {
    builder.set_infer_bills(true);
  }
  const auto& votes = doc["votes"];
  for (std::size_t r = 0; r < votes.size(); ++r) {
    const std::string where = "votes[" + std::to_string(r) + "]";
    if (!votes[r].is_object()) throw Error(ErrorCode::MalformedRecord, where + ": not an object");
    builder.add_vote(json_string(votes[r], "voter_id", where), json_string(votes[r], "bill_id", where),
                     json_string(votes[r], "vote", where), where);
  }
  return builder.build("json");
}

VoteDataset parse_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (trim(text).empty()) throw Error(ErrorCode::MalformedRecord, path.string() + ": empty file");
  return parse_json_text(text);
}

VoteDataset parse_dataset(const std::filesystem::path& path, InputFormat format) {
  if (format == InputFormat::Json) return parse_json(path);
  CsvPaths paths{path / "votes.csv", path / "voters.csv", std::nullopt};
  if (std::filesystem::exists(path / "bills.csv")) paths.bills = path / "bills.csv";
  return parse_csv(paths);
}

void write_csv(const VoteDataset& d, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("voters.csv");
    out << "voter_id,group\n";
    for (std::size_t i = 0; i < d.num_voters(); ++i)
      out << csv_escape(d.voters()[i].id) << ',' << csv_escape(d.group_of(i)) << '\n';
  }
  {
    auto out = open("bills.csv");
    out << "bill_id,date,description,secret\n";
    for (const auto& b : d.bills())
      out << csv_escape(b.id) << ',' << b.date << ',' << csv_escape(b.description) << ',' << (b.secret_ballot ? 1 : 0)
          << '\n';
  }
  {
    auto out = open("votes.csv");
    out << "voter_id,bill_id,vote\n";
    for (std::size_t i = 0; i < d.num_voters(); ++i)
      for (std::size_t j = 0; j < d.num_bills(); ++j)
        out << csv_escape(d.voters()[i].id) << ',' << csv_escape(d.bills()[j].id) << ',' << to_string(d.vote(i, j))
            << '\n';
  }
}

std::string to_json_text(const VoteDataset& d) {
  json doc;
  doc["groups"] = d.groups();
  doc["voters"] = json::array();
  for (std::size_t i = 0; i < d.num_voters(); ++i)
    doc["voters"].push_back({{"voter_id", d.voters()[i].id}, {"group", d.group_of(i)}});
  doc["bills"] = json::array();
  for (const auto& b : d.bills())
    doc["bills"].push_back(
        {{"bill_id", b.id}, {"date", b.date}, {"description", b.description}, {"secret", b.secret_ballot ? 1 : 0}});
  doc["votes"] = json::array();
  for (std::size_t i = 0; i < d.num_voters(); ++i)
    for (std::size_t j = 0; j < d.num_bills(); ++j)
      doc["votes"].push_back(
          {{"voter_id", d.voters()[i].id}, {"bill_id", d.bills()[j].id}, {"vote", std::string(to_string(d.vote(i, j)))}});
  return doc.dump(1) + "\n";
}

VoteDataset clean_dataset(const VoteDataset& d, CleaningReport* report) {
  CleaningReport rep;
  std::vector<std::size_t> voters(d.num_voters());
  for (std::size_t i = 0; i < voters.size(); ++i) voters[i] = i;
  std::vector<std::size_t> bills;
  for (std::size_t j = 0; j < d.num_bills(); ++j) {
    if (d.bills()[j].secret_ballot)
      ++rep.secret_bills_removed;
    else
      bills.push_back(j);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    ++rep.passes;

    std::vector<std::size_t> kept_voters;
    for (std::size_t i : voters) {
      const bool voted = std::any_of(bills.begin(), bills.end(), [&](std::size_t j) { return d.vote(i, j) != VoteValue::NotVoting; });
      if (voted)
        kept_voters.push_back(i);
      else
        ++rep.silent_voters_removed;
    }
    changed |= kept_voters.size() != voters.size();
    voters = std::move(kept_voters);

    std::vector<std::size_t> kept_bills;
    for (std::size_t j : bills) {
      const bool varies = !voters.empty() && std::any_of(voters.begin(), voters.end(),
                                                         [&](std::size_t i) { return d.vote(i, j) != d.vote(voters.front(), j); });
      if (varies)
        kept_bills.push_back(j);
      else
        ++rep.constant_bills_removed;
    }
    changed |= kept_bills.size() != bills.size();
    bills = std::move(kept_bills);
  }

  if (voters.empty() || bills.empty())
    throw Error(ErrorCode::EmptyAfterCleaning, std::to_string(voters.size()) + " voters and " +
                                                   std::to_string(bills.size()) + " bills remain");
  VoteDataset out = d.subset(voters, bills);
  rep.empty_groups_removed = d.num_groups() - out.num_groups();
  if (report) *report = rep;
  return out;
}

VoteDataset merge_small_groups(const VoteDataset& d, std::string_view target, std::size_t min_size) {
  const auto target_idx = d.find_group(target);
  if (!target_idx) throw Error(ErrorCode::UnknownGroup, "merge target '" + std::string(target) + "' is not a group");
  std::vector<std::size_t> counts(d.num_groups(), 0);
  for (const auto& v : d.voters()) ++counts[v.group];

  std::vector<std::string> groups;
  std::vector<std::size_t> remap(d.num_groups());
  for (std::size_t g = 0; g < d.num_groups(); ++g)
    if (g == *target_idx || counts[g] >= min_size) {
      remap[g] = groups.size();
      groups.push_back(d.groups()[g]);
    }
  for (std::size_t g = 0; g < d.num_groups(); ++g)
    if (g != *target_idx && counts[g] < min_size) remap[g] = remap[*target_idx];

  std::vector<Voter> voters;
  for (const auto& v : d.voters()) voters.push_back(Voter{v.id, remap[v.group]});
  VoteDataset out(std::move(groups), std::move(voters), d.bills());
  for (std::size_t i = 0; i < d.num_voters(); ++i)
    for (std::size_t j = 0; j < d.num_bills(); ++j) out.set_vote(i, j, d.vote(i, j));
  return out;
}

}  // namespace pdna
