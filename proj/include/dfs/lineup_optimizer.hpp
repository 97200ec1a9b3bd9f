#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfs/data_pipeline.hpp"

namespace dfs {

// Position counts for RB/WR/TE; QB and DST are always 1.
struct FlexConfig {
  int rb = 2;
  int wr = 3;
  int te = 1;

  friend bool operator==(const FlexConfig&, const FlexConfig&) = default;
};

// The flex slot taken by a TE, a WR, or an RB.
inline constexpr std::array<FlexConfig, 3> kFlexConfigs = {
    FlexConfig{2, 3, 2}, FlexConfig{2, 4, 1}, FlexConfig{3, 3, 1}};

inline constexpr int kLineupSize = 9;
inline constexpr int kDefaultSalaryCap = 50000;

std::string to_string(const FlexConfig& flex);  // "RB/WR/TE", e.g. "2/3/2"
std::optional<FlexConfig> parse_flex(std::string_view text);
// Position filling the flex slot in a configuration.
Position flex_position(const FlexConfig& flex);

struct ContestRules {
  int salary_cap = kDefaultSalaryCap;
  FlexConfig flex = kFlexConfigs[0];
  bool require_two_teams = false;

  int required(Position p) const;
  void validate() const;  // throws InputError
};

struct Candidate {
  std::string player_id;
  Position position = Position::QB;
  int salary = 0;
  double predicted_fpts = 0.0;
  std::string team;
  std::optional<double> actual_fpts;
};

struct LineupSlot {
  std::string slot;  // QB, RB, WR, TE, FLEX, DST
  std::string player_id;
  Position position = Position::QB;
  int salary = 0;
  double predicted_fpts = 0.0;
  std::optional<double> actual_fpts;
};

struct Lineup {
  std::vector<LineupSlot> slots;  // QB, RB x2, WR x3, TE, FLEX, DST
  FlexConfig flex;
  int total_salary = 0;
  double predicted_fpts = 0.0;
  std::optional<double> actual_fpts;

  // Lineup identity: the sorted player ids.
  std::vector<std::string> player_ids() const;
};

// Assigns slots to a set of candidates for a given configuration.
Lineup make_lineup(std::span<const Candidate* const> players, const FlexConfig& flex);

// Exact maximizer of predicted FPTS for one configuration. Ties go to the
// lexicographically smallest sorted id tuple. Throws InfeasibleError on a
// position shortfall or when nothing fits under the cap.
Lineup solve_config(std::span<const Candidate> candidates, const ContestRules& rules);

// Best of the three flex configurations, same tie rule.
Lineup optimize_all_flex(std::span<const Candidate> candidates, const ContestRules& rules);

// Most frequent identity; ties go to the smallest sorted id tuple. Returns the
// first occurrence of that identity.
Lineup modal_lineup(std::span<const Lineup> lineups);

struct ModalSummary {
  Lineup lineup;
  std::size_t count = 0;
  std::size_t distinct = 0;
};
ModalSummary modal_summary(std::span<const Lineup> lineups);

double score_lineup(const Lineup& lineup, const std::map<std::string, double>& actuals);
std::vector<std::string> missing_actuals(const Lineup& lineup,
                                         const std::map<std::string, double>& actuals);

void write_lineup_csv(std::ostream& out, const Lineup& lineup);
Lineup read_lineup_csv(std::string_view text, const std::string& source = "<memory>");

}  // namespace dfs
