// Generates the bundled synthetic season: players.csv, contest_results.csv,
// exclusions.txt and config.json. Output is a pure function of the seed.
//
//   make_fixture <output-dir> [seed]
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dfs/data_pipeline.hpp"
#include "dfs/rng.hpp"
#include "dfs/text_io.hpp"

namespace {

constexpr int kTeams = 32;
constexpr int kWeeks = dfs::kLastWeek;
constexpr int kTargetWeek = 6;
constexpr std::size_t kContestUsers = 20000;

struct Team {
  std::string code;
  double offense = 0.0;  // expected points scored above league average
  double defense = 0.0;  // expected points allowed below league average
  double latitude = 0.0;
  double longitude = 0.0;
};

struct Player {
  std::string id;
  dfs::Position position = dfs::Position::QB;
  int team = 0;
  double talent = 0.0;  // mean FPTS in an average matchup
  double volatility = 0.0;
};

struct Game {
  int home = 0;
  int away = 0;
  double spread = 0.0;  // home line; negative when home is favoured
  double over_under = 0.0;
  int home_points = 0;
  int away_points = 0;
};

// Stadium coordinates for 32 franchises, roughly continental US.
constexpr std::array<std::array<double, 2>, kTeams> kStadiums = {{
    {42.77, -78.79}, {25.96, -80.24}, {42.09, -71.26}, {40.81, -74.07},
    {39.28, -76.62}, {39.10, -84.52}, {41.51, -81.70}, {40.45, -80.02},
    {29.68, -95.41}, {39.76, -86.16}, {30.32, -81.64}, {36.17, -86.77},
    {39.74, -105.02}, {39.05, -94.48}, {37.75, -122.20}, {32.78, -117.12},
    {32.75, -97.09}, {40.81, -74.07}, {39.90, -75.17}, {38.91, -76.86},
    {41.86, -87.62}, {42.34, -83.05}, {44.50, -88.06}, {44.97, -93.26},
    {33.76, -84.40}, {35.23, -80.85}, {29.95, -90.08}, {27.98, -82.50},
    {33.53, -112.26}, {34.01, -118.29}, {37.40, -121.97}, {47.60, -122.33},
}};

std::string team_code(int t) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "T%02d", t + 1);
  return buf;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// Nearest multiple of 0.02, computed in hundredths so the decimal form stays short.
double round_points(double v) { return std::round(v * 50.0) * 2.0 / 100.0; }

// Per-week game lists; teams absent from a week's list are on bye.
std::vector<std::vector<Game>> make_schedule(const std::vector<Team>& teams, dfs::Rng& rng) {
  // Weeks 5 to 12 each rest four teams; every team gets exactly one bye.
  std::vector<int> bye_order(kTeams);
  for (int t = 0; t < kTeams; ++t) bye_order[t] = t;
  rng.shuffle(std::span<int>(bye_order));
  std::vector<int> bye_week(kTeams, 0);
  for (int i = 0; i < kTeams; ++i) bye_week[bye_order[i]] = 5 + i / 4;

  std::vector<std::vector<Game>> weeks(kWeeks + 1);
  for (int w = 1; w <= kWeeks; ++w) {
    std::vector<int> playing;
    for (int t = 0; t < kTeams; ++t) {
      if (bye_week[t] != w) playing.push_back(t);
    }
    rng.shuffle(std::span<int>(playing));
    for (std::size_t i = 0; i + 1 < playing.size(); i += 2) {
      Game g;
      g.home = playing[i];
      g.away = playing[i + 1];
      const auto& h = teams[g.home];
      const auto& a = teams[g.away];
      const double home_exp = 22.5 + h.offense + a.defense + 1.5;
      const double away_exp = 22.5 + a.offense + h.defense - 1.5;
      g.spread = round_to(-(home_exp - away_exp) + 1.5 * rng.normal(), 0.5);
      g.over_under = round_to(home_exp + away_exp + 2.0 * rng.normal(), 0.5);
      g.home_points = std::max(0, static_cast<int>(std::lround(home_exp + 9.0 * rng.normal())));
      g.away_points = std::max(0, static_cast<int>(std::lround(away_exp + 9.0 * rng.normal())));
      weeks[w].push_back(g);
    }
  }
  return weeks;
}

// Ranks 1..32 (1 = best) of a noisy weekly rating.
std::vector<int> weekly_ranks(const std::vector<double>& rating, dfs::Rng& rng) {
  std::vector<std::pair<double, int>> order;
  for (int t = 0; t < kTeams; ++t) order.emplace_back(rating[t] + 1.5 * rng.normal(), t);
  std::sort(order.begin(), order.end(), std::greater<>());
  std::vector<int> rank(kTeams);
  for (int i = 0; i < kTeams; ++i) rank[order[i].second] = i + 1;
  return rank;
}

std::vector<Player> make_players(dfs::Rng& rng) {
  struct Quota {
    dfs::Position position;
    int per_team_min;
    int total;
    double top;
    double bottom;
  };
  const std::array<Quota, 5> quotas = {{
      {dfs::Position::QB, 1, 32, 23.0, 12.0},
      {dfs::Position::RB, 2, 80, 19.0, 4.0},
      {dfs::Position::WR, 3, 100, 18.0, 4.0},
      {dfs::Position::TE, 1, 56, 13.0, 3.0},
      {dfs::Position::DST, 1, 32, 10.0, 5.0},
  }};
  std::vector<Player> players;
  for (const auto& q : quotas) {
    std::vector<int> teams;
    for (int t = 0; t < kTeams; ++t) {
      for (int k = 0; k < q.per_team_min; ++k) teams.push_back(t);
    }
    while (static_cast<int>(teams.size()) < q.total) {
      teams.push_back(static_cast<int>(rng.below(kTeams)));
    }
    for (int i = 0; i < q.total; ++i) {
      Player p;
      char buf[16];
      std::snprintf(buf, sizeof buf, "%s%03d", std::string(dfs::to_string(q.position)).c_str(),
                    i + 1);
      p.id = buf;
      p.position = q.position;
      p.team = teams[i];
      const double u = std::pow(rng.uniform(), 1.6);
      p.talent = q.bottom + (q.top - q.bottom) * (1.0 - u);
      p.volatility = 0.20 + 0.10 * rng.uniform();
      players.push_back(std::move(p));
    }
  }
  return players;
}

struct SalaryBand {
  double low;
  double high;
};

SalaryBand band(dfs::Position p) {
  switch (p) {
    case dfs::Position::QB: return {4600, 7800};
    case dfs::Position::RB: return {3600, 9200};
    case dfs::Position::WR: return {3400, 9000};
    case dfs::Position::TE: return {2600, 7000};
    case dfs::Position::DST: return {2200, 4400};
  }
  return {3000, 6000};
}

std::string fmt(double v) { return dfs::text::format_double(v); }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <output-dir> [seed]\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20180906;
  std::filesystem::create_directories(dir);

  dfs::Rng rng(dfs::derive_seed(seed, 0));
  std::vector<Team> teams(kTeams);
  std::vector<double> off_rating(kTeams), def_rating(kTeams);
  for (int t = 0; t < kTeams; ++t) {
    teams[t].code = team_code(t);
    teams[t].offense = 4.0 * rng.normal();
    teams[t].defense = 3.5 * rng.normal();
    teams[t].latitude = kStadiums[t][0];
    teams[t].longitude = kStadiums[t][1];
    off_rating[t] = teams[t].offense;
    def_rating[t] = -teams[t].defense;
  }
  const auto schedule = make_schedule(teams, rng);
  auto players = make_players(rng);

  // A durable injury keeps a handful of players out for several weeks.
  dfs::Rng injuries(dfs::derive_seed(seed, 1));
  std::vector<int> injury_start(players.size(), 0), injury_len(players.size(), 0);
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (players[i].position != dfs::Position::DST && injuries.uniform() < 0.08) {
      injury_start[i] = 2 + static_cast<int>(injuries.below(kWeeks - 2));
      injury_len[i] = 1 + static_cast<int>(injuries.below(3));
    }
  }
  // One starter is ruled out of the target week after salaries are set; they
  // stay on the slate and belong in the exclusion file.
  std::vector<bool> plays_target(kTeams, false);
  for (const auto& g : schedule[kTargetWeek]) plays_target[g.home] = plays_target[g.away] = true;
  std::size_t late_scratch = players.size();
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (players[i].position == dfs::Position::WR && injury_len[i] == 0 &&
        plays_target[players[i].team] &&
        (late_scratch == players.size() || players[i].talent > players[late_scratch].talent)) {
      late_scratch = i;
    }
  }

  dfs::Rng perf(dfs::derive_seed(seed, 2));
  std::vector<double> form(players.size());
  for (std::size_t i = 0; i < players.size(); ++i) form[i] = players[i].talent;

  std::ofstream csv(dir / "players.csv");
  csv << "player_id,week,position,salary,fpts,point_diff,team_off_rank,team_def_rank,"
         "opp_off_rank,opp_def_rank,home,spread,over_under,latitude,longitude,draftable,team\n";

  struct Row {
    std::string id;
    int week;
    std::string line;
  };
  std::vector<Row> rows;

  for (int w = 1; w <= kWeeks; ++w) {
    const auto off_rank = weekly_ranks(off_rating, rng);
    const auto def_rank = weekly_ranks(def_rating, rng);
    std::vector<const Game*> game_of(kTeams, nullptr);
    for (const auto& g : schedule[w]) {
      game_of[g.home] = &g;
      game_of[g.away] = &g;
    }
    for (std::size_t i = 0; i < players.size(); ++i) {
      const Player& p = players[i];
      const Game* g = game_of[p.team];
      const auto b = band(p.position);
      const double rel = std::clamp((form[i] - 2.0) / 22.0, 0.0, 1.0);
      const int salary =
          static_cast<int>(round_to(b.low + (b.high - b.low) * rel + 150.0 * perf.normal(), 100.0));
      const int clamped_salary = std::clamp(salary, static_cast<int>(b.low) - 400,
                                            static_cast<int>(b.high) + 400);

      const bool injured = injury_len[i] > 0 && w >= injury_start[i] &&
                           w < injury_start[i] + injury_len[i];
      const bool scratched = i == late_scratch && w == kTargetWeek;
      const bool dnp = injured || scratched || (g && perf.uniform() < 0.01);
      const bool draftable = g != nullptr && (!injured || w == injury_start[i]);

      std::string line = p.id + "," + std::to_string(w) + "," +
                         std::string(dfs::to_string(p.position)) + "," +
                         std::to_string(g ? clamped_salary : 0) + ",";
      if (!g) {
        // Bye week: no game context and no points.
        line += ",,,,,,0,,,,,0";
      } else {
        const bool home = g->home == p.team;
        const int opp = home ? g->away : g->home;
        const int scored = home ? g->home_points : g->away_points;
        const int allowed = home ? g->away_points : g->home_points;
        const double spread = home ? g->spread : -g->spread;
        const auto& venue = teams[g->home];

        std::string fpts;
        if (!dnp) {
          double value;
          if (p.position == dfs::Position::DST) {
            value = p.talent + 0.35 * (20.0 - allowed) - teams[opp].offense * 0.3 +
                    3.0 * perf.normal();
          } else {
            const double matchup = 1.0 + 0.025 * (teams[p.team].offense + teams[opp].defense) +
                                   0.012 * (g->over_under - 45.0) + 0.01 * (scored - 22.5);
            value = p.talent * std::max(0.2, matchup) *
                    std::max(0.0, 1.0 + p.volatility * perf.normal());
          }
          value = round_points(value);
          if (value == 0.0) value = 0.0;  // normalize -0
          fpts = fmt(value);
          form[i] = 0.8 * form[i] + 0.2 * value;
        }
        line += fpts + "," + std::to_string(scored - allowed) + "," +
                std::to_string(off_rank[p.team]) + "," + std::to_string(def_rank[p.team]) + "," +
                std::to_string(off_rank[opp]) + "," + std::to_string(def_rank[opp]) + "," +
                (home ? "1" : "0") + "," + fmt(spread) + "," + fmt(g->over_under) + "," +
                fmt(venue.latitude) + "," + fmt(venue.longitude) + "," + (draftable ? "1" : "0");
      }
      line += "," + teams[p.team].code;
      rows.push_back({p.id, w, std::move(line)});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.id != b.id ? a.id < b.id : a.week < b.week;
  });
  for (const auto& r : rows) csv << r.line << '\n';

  std::ofstream excl(dir / "exclusions.txt");
  excl << "# ruled out after the slate was published\n" << players[late_scratch].id << '\n';

  // Contest entries: mostly near-normal scores, a few abandoned (zero) entries.
  dfs::Rng contest(dfs::derive_seed(seed, 3));
  std::vector<double> scores;
  for (std::size_t u = 0; u < kContestUsers; ++u) {
    double s = 0.0;
    if (contest.uniform() >= 0.015) s = std::max(0.02, round_points(118.0 + 24.0 * contest.normal()));
    scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end(), std::greater<>());
  std::ofstream results(dir / "contest_results.csv");
  results << "user_rank,fpts\n";
  for (std::size_t u = 0; u < scores.size(); ++u) results << u + 1 << ',' << fmt(scores[u]) << '\n';

  std::ofstream config(dir / "config.json");
  config << R"({
  "paths": {
    "players": "players.csv",
    "exclusions": "exclusions.txt",
    "contest_results": "contest_results.csv",
    "output_dir": "out"
  },
  "season": { "target_week": 6 },
  "ensemble": { "n_models": 200, "master_seed": 2018, "workers": 1, "interval_level": 0.95 },
  "baseline": { "count": 35000, "min_salary": 45000, "flex": "uniform" },
  "report": { "bootstrap_resamples": 10000, "histogram_bin_width": 2.0 }
}
)";
  return 0;
}
