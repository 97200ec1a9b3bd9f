// Small hand-built season tables for the data pipeline tests.
#pragma once

#include <optional>
#include <sstream>
#include <string>

namespace testing_support {

inline constexpr const char* kPlayersHeader =
    "player_id,week,position,salary,fpts,point_diff,team_off_rank,team_def_rank,"
    "opp_off_rank,opp_def_rank,home,spread,over_under,latitude,longitude,draftable";

struct WeekRow {
  std::string id = "P1";
  int week = 1;
  std::string position = "WR";
  int salary = 5000;
  std::optional<double> fpts = 10.0;
  int point_diff = 3;
  int team_off = 10, team_def = 20, opp_off = 5, opp_def = 15;
  bool home = true;
  std::string spread = "-3.5";
  std::string over_under = "47.5";
  std::string lat = "40.8";
  std::string lon = "-74.1";
  bool draftable = true;

  std::string line() const {
    std::ostringstream out;
    out << id << ',' << week << ',' << position << ',' << salary << ',';
    if (fpts) out << *fpts;
    out << ',' << point_diff << ',' << team_off << ',' << team_def << ',' << opp_off << ','
        << opp_def << ',' << (home ? 1 : 0) << ',' << spread << ',' << over_under << ',' << lat
        << ',' << lon << ',' << (draftable ? 1 : 0);
    return out.str();
  }
};

class SeasonText {
 public:
  SeasonText& add(const WeekRow& r) {
    body_ += r.line() + "\n";
    return *this;
  }
  // Adds weeks [first, last] for one player; fpts = 10 * week unless `bye`.
  SeasonText& weeks(const std::string& id, const std::string& pos, int first, int last,
                    int bye = 0) {
    for (int w = first; w <= last; ++w) {
      WeekRow r;
      r.id = id;
      r.position = pos;
      r.week = w;
      r.fpts = w == bye ? std::nullopt : std::optional<double>(10.0 * w);
      r.point_diff = w;
      r.team_off = w;
      r.home = w % 2 == 1;
      add(r);
    }
    return *this;
  }
  std::string str() const { return std::string(kPlayersHeader) + "\n" + body_; }

 private:
  std::string body_;
};

}  // namespace testing_support
