#include "dfs/data_pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "dfs/error.hpp"
#include "dfs/text_io.hpp"

namespace dfs {

namespace {

constexpr std::array<std::string_view, 16> kColumns = {
    "player_id",     "week",         "position",     "salary",
    "fpts",          "point_diff",   "team_off_rank", "team_def_rank",
    "opp_off_rank",  "opp_def_rank", "home",         "spread",
    "over_under",    "latitude",     "longitude",    "draftable"};

constexpr std::string_view kTeamColumn = "team";

class RowParser {
 public:
  RowParser(const std::string& source, std::size_t line,
            const std::vector<std::string_view>& fields)
      : source_(source), line_(line), fields_(fields) {}

  std::string_view raw(std::size_t col) const { return text::trim(fields_[col]); }

  [[noreturn]] void fail(std::size_t col, const std::string& message) const {
    const std::string name = col < kColumns.size() ? std::string(kColumns[col])
                                                   : std::string(kTeamColumn);
    throw ParseError(source_, line_, name, message);
  }

  long long integer(std::size_t col, long long lo, long long hi) const {
    const auto v = text::parse_int(raw(col));
    if (!v) fail(col, "expected an integer, got '" + std::string(raw(col)) + "'");
    if (*v < lo || *v > hi) {
      fail(col, "value " + std::to_string(*v) + " outside [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
    }
    return *v;
  }

  std::optional<int> optional_integer(std::size_t col, long long lo, long long hi) const {
    if (raw(col).empty()) return std::nullopt;
    return static_cast<int>(integer(col, lo, hi));
  }

  std::optional<double> optional_real(std::size_t col, double lo, double hi) const {
    if (raw(col).empty()) return std::nullopt;
    const auto v = text::parse_double(raw(col));
    if (!v) fail(col, "expected a real number, got '" + std::string(raw(col)) + "'");
    if (*v < lo || *v > hi) fail(col, "value outside allowed range");
    return v;
  }

  bool flag(std::size_t col) const {
    const auto s = raw(col);
    if (s == "0") return false;
    if (s == "1") return true;
    fail(col, "expected 0 or 1, got '" + std::string(s) + "'");
  }

 private:
  const std::string& source_;
  std::size_t line_;
  const std::vector<std::string_view>& fields_;
};

bool header_matches(const std::vector<std::string_view>& header, bool& has_team) {
  if (header.size() != kColumns.size() && header.size() != kColumns.size() + 1) return false;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (text::trim(header[i]) != kColumns[i]) return false;
  }
  has_team = header.size() == kColumns.size() + 1;
  return !has_team || text::trim(header.back()) == kTeamColumn;
}

std::string missing_field(const PlayerWeekRecord& r, bool full_game) {
  if (full_game) {
    if (!r.point_diff) return "point_diff";
    if (!r.team_off_rank) return "team_off_rank";
    if (!r.team_def_rank) return "team_def_rank";
    if (!r.opp_off_rank) return "opp_off_rank";
    if (!r.opp_def_rank) return "opp_def_rank";
  }
  if (!r.spread) return "spread";
  if (!r.over_under) return "over_under";
  if (!r.latitude) return "latitude";
  if (!r.longitude) return "longitude";
  return {};
}

int count_played(const SeasonTable& table, const std::string& id, int first, int last) {
  int played = 0;
  for (int w = std::max(first, kFirstWeek); w <= last; ++w) {
    const auto* r = table.find(id, w);
    if (r && r->played()) ++played;
  }
  return played;
}

}  // namespace

std::string_view to_string(Position p) {
  switch (p) {
    case Position::QB: return "QB";
    case Position::RB: return "RB";
    case Position::WR: return "WR";
    case Position::TE: return "TE";
    case Position::DST: return "DST";
  }
  return "?";
}

std::optional<Position> parse_position(std::string_view text) {
  for (const Position p : kAllPositions) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

void SeasonTable::insert(PlayerWeekRecord record) {
  Key key{record.player_id, record.week};
  if (records_.contains(key)) {
    throw InputError("duplicate record for player '" + record.player_id + "' week " +
                     std::to_string(record.week));
  }
  records_.emplace(std::move(key), std::move(record));
}

const PlayerWeekRecord* SeasonTable::find(const std::string& player_id, int week) const {
  const auto it = records_.find(Key{player_id, week});
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<std::string> SeasonTable::player_ids() const {
  std::vector<std::string> ids;
  for (const auto& [key, _] : records_) {
    if (ids.empty() || ids.back() != key.first) ids.push_back(key.first);
  }
  return ids;
}

std::set<int> SeasonTable::weeks() const {
  std::set<int> out;
  for (const auto& [key, _] : records_) out.insert(key.second);
  return out;
}

SeasonTable parse_player_weeks(std::string_view content, const std::string& source) {
  const auto all = text::lines(content);
  std::size_t first = 0;
  while (first < all.size() && text::trim(all[first]).empty()) ++first;
  if (first == all.size()) throw ParseError(source, 1, "player_id", "missing header");

  bool has_team = false;
  if (!header_matches(text::split(all[first]), has_team)) {
    throw ParseError(source, first + 1, "player_id", "header does not match the players schema");
  }
  const std::size_t width = kColumns.size() + (has_team ? 1 : 0);

  SeasonTable table;
  for (std::size_t i = first + 1; i < all.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (text::trim(all[i]).empty()) continue;
    const auto fields = text::split(all[i]);
    if (fields.size() != width) {
      throw ParseError(source, line_no, "player_id",
                       "expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()));
    }
    const RowParser row(source, line_no, fields);

    PlayerWeekRecord r;
    r.player_id = std::string(row.raw(0));
    if (r.player_id.empty()) row.fail(0, "empty player_id");
    r.week = static_cast<int>(row.integer(1, kFirstWeek, kLastWeek));
    const auto pos = parse_position(row.raw(2));
    if (!pos) row.fail(2, "unknown position '" + std::string(row.raw(2)) + "'");
    r.position = *pos;
    r.salary = static_cast<int>(row.integer(3, 0, 1'000'000'000));
    r.fpts = row.optional_real(4, -1e6, 1e6);
    r.point_diff = row.optional_integer(5, -1000, 1000);
    r.team_off_rank = row.optional_integer(6, 1, 32);
    r.team_def_rank = row.optional_integer(7, 1, 32);
    r.opp_off_rank = row.optional_integer(8, 1, 32);
    r.opp_def_rank = row.optional_integer(9, 1, 32);
    r.home = row.flag(10);
    r.spread = row.optional_real(11, -1e3, 1e3);
    r.over_under = row.optional_real(12, -1e3, 1e3);
    r.latitude = row.optional_real(13, -90.0, 90.0);
    r.longitude = row.optional_real(14, -180.0, 180.0);
    r.draftable = row.flag(15);
    if (has_team) r.team = std::string(row.raw(16));
    if (r.draftable && r.salary <= 0) row.fail(3, "draftable player must have a positive salary");

    try {
      table.insert(std::move(r));
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

SeasonTable load_player_weeks(const std::filesystem::path& csv_path) {
  return parse_player_weeks(text::read_file(csv_path), csv_path.string());
}

std::array<double, kPositionCount> encode_position(Position p) {
  std::array<double, kPositionCount> out{};
  out[static_cast<std::size_t>(p)] = 1.0;
  return out;
}

std::vector<std::string> eligible_players(const SeasonTable& table, int target_week,
                                          WindowMode mode) {
  if (target_week < kFirstWeek + kMinGamesInLookback) {
    throw InputError("insufficient history: target week " + std::to_string(target_week) +
                     " needs at least " + std::to_string(kMinGamesInLookback) +
                     " prior weeks");
  }
  const int draft_week = mode == WindowMode::kTrain ? target_week - 1 : target_week;
  std::vector<std::string> out;
  for (const auto& id : table.player_ids()) {
    const auto* rec = table.find(id, draft_week);
    if (!rec || !rec->draftable) continue;
    if (mode == WindowMode::kTrain && !rec->played()) continue;
    if (count_played(table, id, target_week - kLookbackWeeks, target_week - 1) <
        kMinGamesInLookback) {
      continue;
    }
    out.push_back(id);
  }
  return out;
}

WindowDataset build_window(const SeasonTable& table, int window_index, WindowMode mode) {
  if (window_index < 1 || window_index > kWindowCount) {
    throw InputError("window index " + std::to_string(window_index) + " outside [1, " +
                     std::to_string(kWindowCount) + "]");
  }
  const int g4 = game_four_week(window_index);
  const bool train = mode == WindowMode::kTrain;

  WindowDataset ds;
  ds.window_index = window_index;
  ds.target_week = g4;
  ds.has_targets = train;

  for (const auto& id : eligible_players(table, train ? g4 + 1 : g4, mode)) {
    std::vector<const PlayerWeekRecord*> games;
    for (int w = g4 - 1; w >= std::max(kFirstWeek, g4 - kLookbackWeeks) && games.size() < 3;
         --w) {
      const auto* r = table.find(id, w);
      if (r && r->played()) games.push_back(r);
    }
    if (games.size() < 3) {
      ds.excluded.push_back({id, "fewer than 3 played games in lookback"});
      continue;
    }
    std::reverse(games.begin(), games.end());
    const auto* upcoming = table.find(id, g4);
    games.push_back(upcoming);

    std::string missing;
    for (std::size_t g = 0; g < games.size() && missing.empty(); ++g) {
      const std::string field = missing_field(*games[g], g < 3);
      if (!field.empty()) missing = field + " missing in week " + std::to_string(games[g]->week);
    }
    if (!missing.empty()) {
      ds.excluded.push_back({id, missing});
      continue;
    }

    WindowRow row;
    row.player_id = id;
    row.position = upcoming->position;
    auto& v = row.features.values;
    const auto onehot = encode_position(upcoming->position);
    std::copy(onehot.begin(), onehot.end(), v.begin() + feature::kPosition);
    for (std::size_t g = 0; g < 3; ++g) {
      const auto& r = *games[g];
      v[feature::kFpts + g] = *r.fpts;
      v[feature::kPointDiff + g] = *r.point_diff;
      v[feature::kTeamOffRank + g] = *r.team_off_rank;
      v[feature::kTeamDefRank + g] = *r.team_def_rank;
      v[feature::kOppOffRank + g] = *r.opp_off_rank;
      v[feature::kOppDefRank + g] = *r.opp_def_rank;
    }
    for (std::size_t g = 0; g < 4; ++g) {
      const auto& r = *games[g];
      v[feature::kHome + g] = r.home ? 1.0 : 0.0;
      v[feature::kSpread + g] = *r.spread;
      v[feature::kOverUnder + g] = *r.over_under;
      v[feature::kLatitude + g] = *r.latitude;
      v[feature::kLongitude + g] = *r.longitude;
    }
    if (train) row.features.target = *upcoming->fpts;
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

std::set<std::string> load_exclusions(const std::filesystem::path& path) {
  std::set<std::string> out;
  const std::string content = text::read_file(path);
  for (const auto line : text::lines(content)) {
    const auto id = text::trim(line);
    if (id.empty() || id.front() == '#') continue;
    out.emplace(id);
  }
  return out;
}

void apply_exclusions(WindowDataset& dataset, const std::set<std::string>& excluded_ids) {
  std::erase_if(dataset.rows, [&](const WindowRow& row) {
    if (!excluded_ids.contains(row.player_id)) return false;
    dataset.excluded.push_back({row.player_id, "listed in exclusion file"});
    return true;
  });
}

}  // namespace dfs
