// Reference implementations used only by the tests. Each is written without
// reference to the library code it checks: brute force where the input is
// small, long double and textbook formulas elsewhere.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dfs/lineup_optimizer.hpp"
#include "dfs/neural_model.hpp"

namespace oracle {

struct BruteForceResult {
  long double objective = 0;
  std::vector<std::string> ids;  // sorted
  int ties = 0;                  // lineups within 1e-9 of the optimum
};

// Enumerates every subset of the pool that matches the position counts of
// `flex` and fits under `cap`.
inline std::optional<BruteForceResult> brute_force(std::span<const dfs::Candidate> pool,
                                                   int cap, const dfs::FlexConfig& flex) {
  const int n = static_cast<int>(pool.size());
  auto need = [&](dfs::Position p) {
    switch (p) {
      case dfs::Position::QB: return 1;
      case dfs::Position::RB: return flex.rb;
      case dfs::Position::WR: return flex.wr;
      case dfs::Position::TE: return flex.te;
      case dfs::Position::DST: return 1;
    }
    return 0;
  };
  std::optional<BruteForceResult> best;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != 9) continue;
    int counts[5] = {0, 0, 0, 0, 0};
    long salary = 0;
    long double value = 0;
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      counts[static_cast<int>(pool[i].position)]++;
      salary += pool[i].salary;
      value += pool[i].predicted_fpts;
      ids.push_back(pool[i].player_id);
    }
    bool ok = salary <= cap;
    for (auto p : dfs::kAllPositions) ok = ok && counts[static_cast<int>(p)] == need(p);
    if (!ok) continue;
    std::sort(ids.begin(), ids.end());
    if (!best || value > best->objective + 1e-9L) {
      best = BruteForceResult{value, ids, 1};
    } else if (std::fabs(value - best->objective) <= 1e-9L) {
      best->ties++;
      if (ids < best->ids) best->ids = ids;
    }
  }
  return best;
}

inline std::optional<BruteForceResult> brute_force_all_flex(std::span<const dfs::Candidate> pool,
                                                            int cap) {
  std::optional<BruteForceResult> best;
  for (const auto& flex : dfs::kFlexConfigs) {
    auto r = brute_force(pool, cap, flex);
    if (!r) continue;
    if (!best || r->objective > best->objective + 1e-9L) {
      best = r;
    } else if (std::fabs(r->objective - best->objective) <= 1e-9L) {
      best->ties += r->ties;
      if (r->ids < best->ids) best->ids = r->ids;
    }
  }
  return best;
}

// Checks the roster rules directly against the pool. Returns an empty string
// when the lineup is valid, otherwise the first violated rule.
inline std::string lineup_violation(const dfs::Lineup& lineup,
                                    std::span<const dfs::Candidate> pool, int cap,
                                    int min_salary = 0) {
  std::map<std::string, const dfs::Candidate*> by_id;
  for (const auto& c : pool) by_id[c.player_id] = &c;
  if (lineup.slots.size() != 9) return "lineup does not have 9 players";
  std::set<std::string> seen;
  int counts[5] = {0, 0, 0, 0, 0};
  long salary = 0;
  for (const auto& s : lineup.slots) {
    const auto it = by_id.find(s.player_id);
    if (it == by_id.end()) return "player " + s.player_id + " not in pool";
    if (!seen.insert(s.player_id).second) return "player " + s.player_id + " repeated";
    if (it->second->position != s.position) return "position mismatch for " + s.player_id;
    if (it->second->salary != s.salary) return "salary mismatch for " + s.player_id;
    counts[static_cast<int>(s.position)]++;
    salary += it->second->salary;
  }
  if (salary != lineup.total_salary) return "total salary mismatch";
  if (salary > cap) return "salary cap exceeded";
  if (salary < min_salary) return "below minimum salary";
  if (counts[0] != 1 || counts[4] != 1) return "need exactly one QB and one DST";
  const bool matches_config = std::any_of(dfs::kFlexConfigs.begin(), dfs::kFlexConfigs.end(),
                                          [&](const dfs::FlexConfig& f) {
                                            return counts[1] == f.rb && counts[2] == f.wr &&
                                                   counts[3] == f.te;
                                          });
  if (!matches_config) return "position counts match no flex configuration";
  if (counts[1] != lineup.flex.rb || counts[2] != lineup.flex.wr || counts[3] != lineup.flex.te) {
    return "position counts disagree with the reported configuration";
  }
  static const std::vector<std::string> kSlots = {"QB", "RB", "RB", "WR", "WR",
                                                  "WR", "TE", "FLEX", "DST"};
  for (std::size_t i = 0; i < 9; ++i) {
    if (lineup.slots[i].slot != kSlots[i]) return "slot order is not QB RB RB WR WR WR TE FLEX DST";
  }
  return {};
}

// Forward pass written as plain loops in long double.
inline long double forward(const dfs::Network& net, const dfs::NormStats& norm,
                           std::span<const double> x) {
  long double out = net.b2;
  for (Eigen::Index h = 0; h < net.w1.rows(); ++h) {
    long double a = net.b1(h);
    for (Eigen::Index j = 0; j < net.w1.cols(); ++j) {
      const long double z = (static_cast<long double>(x[static_cast<std::size_t>(j)]) - norm.mean(j)) /
                            norm.std(j);
      a += net.w1(h, j) * z;
    }
    out += net.w2(h) / (1.0L + std::exp(-a));
  }
  return out;
}

inline long double mean(std::span<const double> x) {
  long double s = 0;
  for (double v : x) s += v;
  return s / x.size();
}

inline long double variance(std::span<const double> x) {
  const long double m = mean(x);
  long double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1);
}

struct Welch {
  long double t;
  long double df;
};

inline Welch welch(std::span<const double> a, std::span<const double> b) {
  const long double va = variance(a) / a.size();
  const long double vb = variance(b) / b.size();
  const long double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const long double df =
      (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
  return {t, df};
}

inline long double cohens_d(std::span<const double> a, std::span<const double> b) {
  const long double pooled = ((a.size() - 1) * variance(a) + (b.size() - 1) * variance(b)) /
                             (a.size() + b.size() - 2);
  return (mean(a) - mean(b)) / std::sqrt(pooled);
}

inline long double normal_cdf(long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); }

// sup |F_n - Phi| evaluated by counting at every sample point, both sides of
// each jump. Quadratic, fine for test sizes.
inline long double ks_distance(std::span<const double> sample, long double mu, long double sigma) {
  const long double n = sample.size();
  long double d = 0;
  for (double x : sample) {
    long double below = 0, at_or_below = 0;
    for (double y : sample) {
      if (y < x) below += 1;
      if (y <= x) at_or_below += 1;
    }
    const long double f = normal_cdf((x - mu) / sigma);
    d = std::max({d, std::fabs(at_or_below / n - f), std::fabs(f - below / n)});
  }
  return d;
}

// Kolmogorov survival by direct summation of the alternating series.
inline long double kolmogorov_q(long double lambda) {
  if (lambda <= 0) return 1;
  long double s = 0;
  for (int k = 1; k < 200000; ++k) {
    const long double term = std::exp(-2.0L * k * k * lambda * lambda);
    s += (k % 2 ? term : -term);
    if (term < 1e-30L) break;
  }
  return std::clamp(2 * s, 0.0L, 1.0L);
}

// Percentile by direct counting.
inline double percentile(double score, std::span<const double> population) {
  double below = 0, equal = 0;
  for (double v : population) {
    if (v < score) below += 1;
    else if (v == score) equal += 1;
  }
  return 100.0 * (below + 0.5 * equal) / static_cast<double>(population.size());
}

}  // namespace oracle
