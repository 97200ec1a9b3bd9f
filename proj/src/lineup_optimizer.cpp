#include "dfs/lineup_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <set>

#include "dfs/error.hpp"
#include "dfs/text_io.hpp"

namespace dfs {

namespace {

// Predicted FPTS are compared in fixed point so that equal objectives are
// exactly equal regardless of summation order.
constexpr double kValueScale = 1073741824.0;  // 2^30
constexpr double kMaxAbsFpts = 1e6;

std::int64_t fixed_value(double fpts) { return std::llround(fpts * kValueScale); }

struct Node {
  int candidate;  // rank in id order
  int parent;     // -1 at root
};

struct State {
  int salary;
  std::int64_t value;
  int node;  // -1 for the empty set
};

// Shifted state whose node is created only if it survives pruning.
struct Pending {
  int salary;
  std::int64_t value;
  int parent;
  int candidate;  // -1 when the state is carried over unchanged
  int node;
};

class Solver {
 public:
  Solver(std::vector<const Candidate*> ranked, int cap)
      : ranked_(std::move(ranked)), cap_(cap) {}

  // groups: candidate ranks per position in solve order, with required counts.
  // marks[rank]: whether picking the candidate sets the flag.
  // Returns the best root-to-leaf node, or nullopt when infeasible.
  std::optional<std::pair<std::int64_t, int>> solve(
      const std::vector<std::pair<std::vector<int>, int>>& groups,
      const std::vector<bool>& marks, bool require_flag) {
    nodes_.clear();
    // frontier[flag]
    std::array<std::vector<State>, 2> frontier;
    frontier[0].push_back({0, 0, -1});

    for (const auto& [members, need] : groups) {
      // table[k][flag]
      std::vector<std::array<std::vector<State>, 2>> table(static_cast<std::size_t>(need) + 1);
      table[0] = frontier;
      int processed = 0;
      for (const int rank : members) {
        const Candidate& c = *ranked_[static_cast<std::size_t>(rank)];
        const std::int64_t v = fixed_value(c.predicted_fpts);
        const int top = std::min(need - 1, processed);
        for (int k = top; k >= 0; --k) {
          for (int f = 0; f < 2; ++f) {
            const auto& src = table[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)];
            if (src.empty()) continue;
            const int tf = (f != 0 || marks[static_cast<std::size_t>(rank)]) ? 1 : 0;
            std::vector<Pending> shifted;
            shifted.reserve(src.size());
            for (const State& s : src) {
              const int salary = s.salary + c.salary;
              if (salary > cap_) break;  // src is sorted by salary
              shifted.push_back({salary, s.value + v, s.node, rank, -1});
            }
            auto& dst = table[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(tf)];
            dst = merge(dst, shifted);
          }
        }
        ++processed;
      }
      frontier = table[static_cast<std::size_t>(need)];
    }

    std::optional<std::pair<std::int64_t, int>> best;
    for (int f = require_flag ? 1 : 0; f < 2; ++f) {
      const auto& list = frontier[static_cast<std::size_t>(f)];
      if (list.empty()) continue;
      const State& s = list.back();  // maximal key on a Pareto list
      if (!best || better(s.value, s.node, best->first, best->second)) {
        best = std::make_pair(s.value, s.node);
      }
    }
    return best;
  }

  std::vector<int> members(int node) const {
    std::vector<int> out;
    for (int n = node; n >= 0; n = nodes_[static_cast<std::size_t>(n)].parent) {
      out.push_back(nodes_[static_cast<std::size_t>(n)].candidate);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  // Key order: larger value, then lexicographically smaller rank tuple.
  bool better(std::int64_t va, int na, std::int64_t vb, int nb) const {
    if (va != vb) return va > vb;
    return members(na) < members(nb);
  }

  bool better_pending(const Pending& a, const Pending& b) {
    if (a.value != b.value) return a.value > b.value;
    return pending_members(a) < pending_members(b);
  }

  std::vector<int> pending_members(const Pending& p) const {
    if (p.candidate < 0) return members(p.node);
    std::vector<int> out = members(p.parent);
    out.insert(std::upper_bound(out.begin(), out.end(), p.candidate), p.candidate);
    return out;
  }

  // Merges an existing Pareto list with shifted states, keeping only states
  // whose key strictly exceeds that of every cheaper-or-equal state.
  std::vector<State> merge(const std::vector<State>& existing, const std::vector<Pending>& added) {
    std::vector<Pending> all;
    all.reserve(existing.size() + added.size());
    for (const State& s : existing) all.push_back({s.salary, s.value, -1, -1, s.node});
    std::vector<Pending> sorted_added = added;
    // `added` is sorted by salary already; stable merge keeps determinism.
    std::vector<Pending> merged;
    merged.reserve(all.size() + sorted_added.size());
    std::merge(all.begin(), all.end(), sorted_added.begin(), sorted_added.end(),
               std::back_inserter(merged),
               [](const Pending& a, const Pending& b) { return a.salary < b.salary; });

    std::vector<State> out;
    out.reserve(merged.size());
    const Pending* best = nullptr;
    std::size_t i = 0;
    while (i < merged.size()) {
      // Best key among entries sharing this salary.
      const Pending* local = &merged[i];
      std::size_t j = i + 1;
      while (j < merged.size() && merged[j].salary == merged[i].salary) {
        if (better_pending(merged[j], *local)) local = &merged[j];
        ++j;
      }
      if (!best || better_pending(*local, *best)) {
        best = local;
        out.push_back({local->salary, local->value, materialize(*local)});
      }
      i = j;
    }
    return out;
  }

  int materialize(const Pending& p) {
    if (p.candidate < 0) return p.node;
    nodes_.push_back({p.candidate, p.parent});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::vector<const Candidate*> ranked_;
  int cap_;
  std::vector<Node> nodes_;
};

void validate_candidates(std::span<const Candidate> candidates) {
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (c.salary <= 0) {
      throw InputError("candidate '" + c.player_id + "' has non-positive salary");
    }
    if (!std::isfinite(c.predicted_fpts) || std::abs(c.predicted_fpts) > kMaxAbsFpts) {
      throw InputError("candidate '" + c.player_id + "' has out-of-range predicted FPTS");
    }
    if (!seen.insert(c.player_id).second) {
      throw InputError("duplicate candidate '" + c.player_id + "'");
    }
  }
}

std::vector<const Candidate*> rank_by_id(std::span<const Candidate> candidates) {
  std::vector<const Candidate*> ranked;
  ranked.reserve(candidates.size());
  for (const auto& c : candidates) ranked.push_back(&c);
  std::sort(ranked.begin(), ranked.end(),
            [](const Candidate* a, const Candidate* b) { return a->player_id < b->player_id; });
  return ranked;
}

std::string cap_diagnosis(std::span<const Candidate> candidates, const ContestRules& rules) {
  long long cheapest = 0;
  for (const Position p : kAllPositions) {
    std::vector<int> salaries;
    for (const auto& c : candidates) {
      if (c.position == p) salaries.push_back(c.salary);
    }
    std::sort(salaries.begin(), salaries.end());
    for (int i = 0; i < rules.required(p); ++i) cheapest += salaries[static_cast<std::size_t>(i)];
  }
  if (cheapest > rules.salary_cap) {
    return "salary cap binds: cheapest lineup with " + to_string(rules.flex) +
           " position counts costs " + std::to_string(cheapest) + ", cap is " +
           std::to_string(rules.salary_cap);
  }
  return "two-team rule binds: no lineup under the cap with " + to_string(rules.flex) +
         " uses players from two or more teams";
}

std::int64_t lineup_key(const Lineup& l) {
  std::int64_t v = 0;
  for (const auto& s : l.slots) v += fixed_value(s.predicted_fpts);
  return v;
}

bool better_lineup(const Lineup& a, const Lineup& b) {
  const auto ka = lineup_key(a);
  const auto kb = lineup_key(b);
  if (ka != kb) return ka > kb;
  return a.player_ids() < b.player_ids();
}

std::size_t team_count(const Lineup& lineup, const std::map<std::string, std::string>& team_of) {
  std::set<std::string> teams;
  for (const auto& s : lineup.slots) teams.insert(team_of.at(s.player_id));
  return teams.size();
}

}  // namespace

std::string to_string(const FlexConfig& flex) {
  return std::to_string(flex.rb) + "/" + std::to_string(flex.wr) + "/" + std::to_string(flex.te);
}

std::optional<FlexConfig> parse_flex(std::string_view text) {
  for (const auto& f : kFlexConfigs) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

Position flex_position(const FlexConfig& flex) {
  if (flex.te == 2) return Position::TE;
  if (flex.wr == 4) return Position::WR;
  return Position::RB;
}

int ContestRules::required(Position p) const {
  switch (p) {
    case Position::QB: return 1;
    case Position::RB: return flex.rb;
    case Position::WR: return flex.wr;
    case Position::TE: return flex.te;
    case Position::DST: return 1;
  }
  return 0;
}

void ContestRules::validate() const {
  if (salary_cap < 0) throw InputError("salary cap must be non-negative");
  if (std::find(kFlexConfigs.begin(), kFlexConfigs.end(), flex) == kFlexConfigs.end()) {
    throw InputError("flex configuration " + to_string(flex) + " is not one of 2/3/2, 2/4/1, 3/3/1");
  }
}

std::vector<std::string> Lineup::player_ids() const {
  std::vector<std::string> ids;
  ids.reserve(slots.size());
  for (const auto& s : slots) ids.push_back(s.player_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Lineup make_lineup(std::span<const Candidate* const> players, const FlexConfig& flex) {
  ContestRules rules;
  rules.flex = flex;
  const Position flex_pos = flex_position(flex);

  Lineup lineup;
  lineup.flex = flex;
  std::vector<LineupSlot> flex_slot;
  for (const Position p : kAllPositions) {
    std::vector<const Candidate*> group;
    for (const Candidate* c : players) {
      if (c->position == p) group.push_back(c);
    }
    if (static_cast<int>(group.size()) != rules.required(p)) {
      throw InputError("lineup has " + std::to_string(group.size()) + " " +
                       std::string(to_string(p)) + ", configuration " + to_string(flex) +
                       " needs " + std::to_string(rules.required(p)));
    }
    std::sort(group.begin(), group.end(), [](const Candidate* a, const Candidate* b) {
      if (a->predicted_fpts != b->predicted_fpts) return a->predicted_fpts > b->predicted_fpts;
      return a->player_id < b->player_id;
    });
    for (std::size_t i = 0; i < group.size(); ++i) {
      const Candidate* c = group[i];
      LineupSlot slot{std::string(to_string(p)), c->player_id, p, c->salary, c->predicted_fpts,
                      c->actual_fpts};
      if (p == flex_pos && i + 1 == group.size()) {
        slot.slot = "FLEX";
        flex_slot.push_back(std::move(slot));
      } else if (p == Position::DST) {
        for (auto& f : flex_slot) lineup.slots.push_back(std::move(f));
        flex_slot.clear();
        lineup.slots.push_back(std::move(slot));
      } else {
        lineup.slots.push_back(std::move(slot));
      }
    }
  }
  for (auto& f : flex_slot) lineup.slots.push_back(std::move(f));

  bool all_actual = true;
  double actual = 0.0;
  std::vector<std::pair<std::string, double>> by_id;
  for (const auto& s : lineup.slots) {
    lineup.total_salary += s.salary;
    by_id.emplace_back(s.player_id, s.predicted_fpts);
    if (s.actual_fpts) {
      actual += *s.actual_fpts;
    } else {
      all_actual = false;
    }
  }
  std::sort(by_id.begin(), by_id.end());
  for (const auto& [id, v] : by_id) lineup.predicted_fpts += v;
  if (all_actual) lineup.actual_fpts = actual;
  return lineup;
}

Lineup solve_config(std::span<const Candidate> candidates, const ContestRules& rules) {
  rules.validate();
  validate_candidates(candidates);
  for (const Position p : kAllPositions) {
    const auto have = std::count_if(candidates.begin(), candidates.end(),
                                    [&](const Candidate& c) { return c.position == p; });
    if (have < rules.required(p)) {
      throw InfeasibleError("position shortfall: configuration " + to_string(rules.flex) +
                            " needs " + std::to_string(rules.required(p)) + " " +
                            std::string(to_string(p)) + ", pool has " + std::to_string(have));
    }
  }

  const auto ranked = rank_by_id(candidates);
  const auto groups_for = [&](const std::string* qb_team) {
    std::vector<std::pair<std::vector<int>, int>> groups;
    for (const Position p : kAllPositions) {
      std::vector<int> members;
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        if (ranked[r]->position != p) continue;
        if (qb_team && p == Position::QB && ranked[r]->team != *qb_team) continue;
        members.push_back(static_cast<int>(r));
      }
      groups.emplace_back(std::move(members), rules.required(p));
    }
    return groups;
  };
  const auto to_lineup = [&](const Solver& solver, int node) {
    std::vector<const Candidate*> picked;
    for (const int r : solver.members(node)) picked.push_back(ranked[static_cast<std::size_t>(r)]);
    return make_lineup(picked, rules.flex);
  };

  Solver solver(ranked, rules.salary_cap);
  const std::vector<bool> no_marks(ranked.size(), false);
  const auto best = solver.solve(groups_for(nullptr), no_marks, false);
  if (!best) throw InfeasibleError(cap_diagnosis(candidates, rules));
  Lineup result = to_lineup(solver, best->second);
  if (!rules.require_two_teams) return result;

  std::map<std::string, std::string> team_of;
  for (const auto& c : candidates) {
    if (c.team.empty()) {
      throw InputError("two-team rule needs a team for candidate '" + c.player_id + "'");
    }
    team_of[c.player_id] = c.team;
  }
  if (team_count(result, team_of) >= 2) return result;

  // Every lineup spanning two teams has a QB from some team t and at least one
  // player outside t; search each t with a "left team t" flag.
  std::set<std::string> qb_teams;
  for (const auto* c : ranked) {
    if (c->position == Position::QB) qb_teams.insert(c->team);
  }
  std::optional<Lineup> best_two;
  for (const auto& t : qb_teams) {
    std::vector<bool> marks(ranked.size());
    for (std::size_t r = 0; r < ranked.size(); ++r) marks[r] = ranked[r]->team != t;
    Solver s(ranked, rules.salary_cap);
    const auto found = s.solve(groups_for(&t), marks, true);
    if (!found) continue;
    Lineup l = to_lineup(s, found->second);
    if (!best_two || better_lineup(l, *best_two)) best_two = std::move(l);
  }
  if (!best_two) {
    throw InfeasibleError("two-team rule binds: no lineup under the cap draws from two teams");
  }
  return *best_two;
}

Lineup optimize_all_flex(std::span<const Candidate> candidates, const ContestRules& rules) {
  std::optional<Lineup> best;
  std::string reasons;
  for (const auto& flex : kFlexConfigs) {
    ContestRules r = rules;
    r.flex = flex;
    try {
      Lineup l = solve_config(candidates, r);
      if (!best || better_lineup(l, *best)) best = std::move(l);
    } catch (const InfeasibleError& e) {
      reasons += std::string(reasons.empty() ? "" : "; ") + e.what();
    }
  }
  if (!best) throw InfeasibleError("no feasible lineup in any flex configuration: " + reasons);
  return *best;
}

ModalSummary modal_summary(std::span<const Lineup> lineups) {
  if (lineups.empty()) throw InputError("modal lineup of an empty list");
  std::map<std::vector<std::string>, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < lineups.size(); ++i) {
    auto [it, inserted] = counts.try_emplace(lineups[i].player_ids(), 0, i);
    ++it->second.first;
  }
  ModalSummary out;
  const std::pair<std::size_t, std::size_t>* best = nullptr;
  for (const auto& [ids, entry] : counts) {
    if (!best || entry.first > best->first) best = &entry;  // map order gives the tie rule
  }
  out.lineup = lineups[best->second];
  out.count = best->first;
  out.distinct = counts.size();
  return out;
}

Lineup modal_lineup(std::span<const Lineup> lineups) { return modal_summary(lineups).lineup; }

std::vector<std::string> missing_actuals(const Lineup& lineup,
                                         const std::map<std::string, double>& actuals) {
  std::vector<std::string> missing;
  for (const auto& s : lineup.slots) {
    if (!actuals.contains(s.player_id)) missing.push_back(s.player_id);
  }
  return missing;
}

double score_lineup(const Lineup& lineup, const std::map<std::string, double>& actuals) {
  const auto missing = missing_actuals(lineup, actuals);
  if (!missing.empty()) {
    throw InputError("no actual FPTS for drafted player '" + missing.front() + "'");
  }
  double total = 0.0;
  for (const auto& s : lineup.slots) total += actuals.at(s.player_id);
  return total;
}

void write_lineup_csv(std::ostream& out, const Lineup& lineup) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? text::format_double(*v) : std::string();
  };
  out << "slot,player_id,position,salary,predicted_fpts,actual_fpts\n";
  for (const auto& s : lineup.slots) {
    out << s.slot << ',' << s.player_id << ',' << to_string(s.position) << ',' << s.salary << ','
        << text::format_double(s.predicted_fpts) << ',' << opt(s.actual_fpts) << '\n';
  }
  out << "TOTAL,," << to_string(lineup.flex) << ',' << lineup.total_salary << ','
      << text::format_double(lineup.predicted_fpts) << ',' << opt(lineup.actual_fpts) << '\n';
}

Lineup read_lineup_csv(std::string_view content, const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.empty() || rows[0] != "slot,player_id,position,salary,predicted_fpts,actual_fpts") {
    throw ParseError(source, 1, "slot", "header does not match the lineup schema");
  }
  std::vector<Candidate> players;
  std::optional<FlexConfig> flex;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty()) continue;
    const auto f = text::split(rows[i]);
    if (f.size() != 6) throw ParseError(source, i + 1, "slot", "expected 6 fields");
    if (f[0] == "TOTAL") {
      flex = parse_flex(f[2]);
      if (!flex) throw ParseError(source, i + 1, "position", "unknown flex configuration");
      continue;
    }
    Candidate c;
    c.player_id = std::string(f[1]);
    const auto pos = parse_position(f[2]);
    const auto salary = text::parse_int(f[3]);
    const auto pred = text::parse_double(f[4]);
    if (!pos) throw ParseError(source, i + 1, "position", "unknown position");
    if (!salary) throw ParseError(source, i + 1, "salary", "expected an integer");
    if (!pred) throw ParseError(source, i + 1, "predicted_fpts", "expected a real number");
    c.position = *pos;
    c.salary = static_cast<int>(*salary);
    c.predicted_fpts = *pred;
    if (!f[5].empty()) {
      c.actual_fpts = text::parse_double(f[5]);
      if (!c.actual_fpts) throw ParseError(source, i + 1, "actual_fpts", "expected a real number");
    }
    players.push_back(std::move(c));
  }
  if (!flex) throw ParseError(source, rows.size(), "slot", "missing TOTAL line");
  std::vector<const Candidate*> ptrs;
  for (const auto& c : players) ptrs.push_back(&c);
  return make_lineup(ptrs, *flex);
}

}  // namespace dfs
