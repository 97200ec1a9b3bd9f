#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dfs {

enum class Position { QB = 0, RB = 1, WR = 2, TE = 3, DST = 4 };

inline constexpr std::size_t kPositionCount = 5;
inline constexpr std::array<Position, kPositionCount> kAllPositions = {
    Position::QB, Position::RB, Position::WR, Position::TE, Position::DST};

std::string_view to_string(Position p);
std::optional<Position> parse_position(std::string_view text);

inline constexpr int kFirstWeek = 1;
inline constexpr int kLastWeek = 17;
inline constexpr int kWindowCount = 14;
inline constexpr int kLookbackWeeks = 6;
inline constexpr int kMinGamesInLookback = 4;

// One player's observations for one week. Game-context fields are optional
// because bye weeks carry no game; `fpts` is absent when the player did not play.
struct PlayerWeekRecord {
  std::string player_id;
  int week = 0;
  Position position = Position::QB;
  int salary = 0;
  std::optional<double> fpts;
  std::optional<int> point_diff;
  std::optional<int> team_off_rank;
  std::optional<int> team_def_rank;
  std::optional<int> opp_off_rank;
  std::optional<int> opp_def_rank;
  bool home = false;
  std::optional<double> spread;
  std::optional<double> over_under;
  std::optional<double> latitude;
  std::optional<double> longitude;
  bool draftable = false;
  std::string team;  // optional trailing column; empty when not supplied

  bool played() const { return fpts.has_value(); }
};

// Loaded season: records keyed by (player_id, week), iterated in that order.
class SeasonTable {
 public:
  using Key = std::pair<std::string, int>;

  void insert(PlayerWeekRecord record);  // throws InputError on duplicate key

  const PlayerWeekRecord* find(const std::string& player_id, int week) const;
  std::vector<std::string> player_ids() const;
  std::set<int> weeks() const;

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::map<Key, PlayerWeekRecord> records_;
};

inline constexpr std::size_t kFeatureCount = 43;

// Feature layout (0-based offsets of each block).
namespace feature {
inline constexpr std::size_t kPosition = 0;        // 5 one-hot entries
inline constexpr std::size_t kFpts = 5;            // games 1-3
inline constexpr std::size_t kPointDiff = 8;       // games 1-3
inline constexpr std::size_t kTeamOffRank = 11;    // games 1-3
inline constexpr std::size_t kTeamDefRank = 14;    // games 1-3
inline constexpr std::size_t kOppOffRank = 17;     // games 1-3
inline constexpr std::size_t kOppDefRank = 20;     // games 1-3
inline constexpr std::size_t kHome = 23;           // games 1-4
inline constexpr std::size_t kSpread = 27;         // games 1-4
inline constexpr std::size_t kOverUnder = 31;      // games 1-4
inline constexpr std::size_t kLatitude = 35;       // games 1-4
inline constexpr std::size_t kLongitude = 39;      // games 1-4
}  // namespace feature

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::optional<double> target;
};

struct WindowRow {
  std::string player_id;
  Position position = Position::QB;
  FeatureVector features;
};

enum class WindowMode { kTrain, kPredict };

// A player dropped from a window after passing eligibility.
struct WindowExclusion {
  std::string player_id;
  std::string reason;
};

struct WindowDataset {
  int window_index = 0;
  int target_week = 0;  // week of game 4
  bool has_targets = false;
  std::vector<WindowRow> rows;  // sorted by player_id
  std::vector<WindowExclusion> excluded;
};

SeasonTable load_player_weeks(const std::filesystem::path& csv_path);
SeasonTable parse_player_weeks(std::string_view text, const std::string& source = "<memory>");

std::array<double, kPositionCount> encode_position(Position p);

// Players eligible when forecasting `target_week`. Predict mode: draftable in
// `target_week`, four or more games played in the six weeks before it. Train
// mode applies to the window whose game 4 is `target_week - 1`: the same
// lookback, draftable in that week and fpts present for it.
std::vector<std::string> eligible_players(const SeasonTable& table, int target_week,
                                          WindowMode mode = WindowMode::kPredict);

// Week of game 4 for window `window_index` (window 1 spans weeks 1-4).
constexpr int game_four_week(int window_index) { return window_index + 3; }

WindowDataset build_window(const SeasonTable& table, int window_index, WindowMode mode);

std::set<std::string> load_exclusions(const std::filesystem::path& path);

// Removes listed players from a dataset, recording each removal.
void apply_exclusions(WindowDataset& dataset, const std::set<std::string>& excluded_ids);

}  // namespace dfs
