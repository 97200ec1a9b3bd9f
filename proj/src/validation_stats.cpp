#include "dfs/validation_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dfs/ensemble.hpp"
#include "dfs/error.hpp"
#include "dfs/parallel.hpp"
#include "dfs/rng.hpp"
#include "dfs/special_functions.hpp"

namespace dfs {

namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (const double v : x) {
    if (!std::isfinite(v)) throw InputError(std::string(what) + " contains a non-finite value");
  }
}

void require_size(std::span<const double> x, std::size_t n, const char* what) {
  if (x.size() < n) {
    throw InputError(std::string(what) + " needs at least " + std::to_string(n) + " values, has " +
                     std::to_string(x.size()));
  }
}

PopulationSummary summarize(std::span<const double> samples, PopulationLabel label,
                            double score, const ComparisonOptions& options) {
  PopulationSummary s;
  s.label = label;
  s.n = samples.size();
  s.mean = mean(samples);
  s.sd = std::sqrt(sample_variance(samples));
  const Interval range = central_interval(samples, options.level);
  s.range_low = range.low;
  s.range_high = range.high;
  s.percentile = percentile(score, samples);
  s.percentile_ci =
      bootstrap_ci(score, samples, options.resamples, options.level, options.seed, options.workers);
  s.ks = ks_normality(samples);
  s.box = boxplot_summary(samples);
  return s;
}

}  // namespace

std::string_view to_string(PopulationLabel label) {
  return label == PopulationLabel::kRandom ? "random" : "real_world";
}

Lineup random_lineup(std::span<const Candidate> pool, const ContestRules& rules,
                     const RandomLineupOptions& options, std::uint64_t seed) {
  if (options.min_salary > rules.salary_cap) {
    throw InputError("minimum salary " + std::to_string(options.min_salary) +
                     " exceeds the salary cap " + std::to_string(rules.salary_cap));
  }
  std::array<std::vector<const Candidate*>, kPositionCount> by_position;
  for (const auto& c : pool) {
    if (!c.actual_fpts || !(*c.actual_fpts > 0.0)) {
      throw InputError("random-lineup pool player '" + c.player_id +
                       "' lacks a positive actual FPTS");
    }
    if (c.salary <= 0) throw InputError("random-lineup pool player '" + c.player_id + "' has no salary");
    by_position[static_cast<std::size_t>(c.position)].push_back(&c);
  }
  for (const auto& flex : kFlexConfigs) {
    if (options.flex && !(flex == *options.flex)) continue;
    ContestRules r = rules;
    r.flex = flex;
    for (const Position p : kAllPositions) {
      if (static_cast<int>(by_position[static_cast<std::size_t>(p)].size()) < r.required(p)) {
        throw InfeasibleError("random-lineup pool has too few " + std::string(to_string(p)));
      }
    }
  }

  Rng rng(seed);
  std::vector<const Candidate*> picked;
  std::vector<const Candidate*> scratch;
  for (int attempt = 0; attempt < options.max_rejections; ++attempt) {
    ContestRules r = rules;
    r.flex = options.flex ? *options.flex : kFlexConfigs[rng.below(kFlexConfigs.size())];
    picked.clear();
    long long salary = 0;
    for (const Position p : kAllPositions) {
      scratch = by_position[static_cast<std::size_t>(p)];
      const auto need = static_cast<std::size_t>(r.required(p));
      for (std::size_t i = 0; i < need; ++i) {
        const std::size_t j = i + rng.below(scratch.size() - i);
        std::swap(scratch[i], scratch[j]);
        picked.push_back(scratch[i]);
        salary += scratch[i]->salary;
      }
    }
    if (salary >= options.min_salary && salary <= rules.salary_cap) {
      // Random lineups are scored on actual FPTS.
      std::vector<Candidate> scored;
      scored.reserve(picked.size());
      for (const Candidate* c : picked) {
        Candidate copy = *c;
        copy.predicted_fpts = *c->actual_fpts;
        scored.push_back(std::move(copy));
      }
      std::vector<const Candidate*> ptrs;
      for (const auto& c : scored) ptrs.push_back(&c);
      return make_lineup(ptrs, r.flex);
    }
  }
  throw InfeasibleError("no random lineup within [" + std::to_string(options.min_salary) + ", " +
                        std::to_string(rules.salary_cap) + "] after " +
                        std::to_string(options.max_rejections) + " consecutive rejections");
}

std::vector<Lineup> random_lineups(std::span<const Candidate> pool, const ContestRules& rules,
                                   const RandomLineupOptions& options, std::size_t count,
                                   std::uint64_t seed, std::size_t workers) {
  std::vector<Lineup> out(count);
  parallel_for(count, workers, [&](std::size_t i) {
    out[i] = random_lineup(pool, rules, options, derive_seed(seed, i));
  });
  return out;
}

PopulationStats random_population(std::span<const Candidate> pool, const ContestRules& rules,
                                  const RandomLineupOptions& options, std::size_t count,
                                  std::uint64_t seed, std::size_t workers) {
  PopulationStats pop;
  pop.label = PopulationLabel::kRandom;
  for (const auto& l : random_lineups(pool, rules, options, count, seed, workers)) {
    pop.samples.push_back(*l.actual_fpts);
  }
  return pop;
}

double percentile(double score, std::span<const double> population) {
  if (population.empty()) throw InputError("percentile of an empty population");
  std::size_t below = 0;
  std::size_t equal = 0;
  for (const double v : population) {
    if (v < score) {
      ++below;
    } else if (v == score) {
      ++equal;
    }
  }
  return 100.0 * (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) /
         static_cast<double>(population.size());
}

PercentileCi bootstrap_ci(double score, std::span<const double> population, std::size_t resamples,
                          double level, std::uint64_t seed, std::size_t workers) {
  if (population.empty()) throw InputError("bootstrap of an empty population");
  if (resamples < 1) throw InputError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw InputError("bootstrap level must lie in (0, 1)");

  // 0 = below, 1 = equal, 2 = above
  std::vector<unsigned char> category(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    category[i] = population[i] < score ? 0 : (population[i] == score ? 1 : 2);
  }
  const std::size_t n = population.size();
  std::vector<double> values(resamples);
  parallel_for(resamples, workers, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) ++counts[category[rng.below(n)]];
    values[r] = 100.0 * (static_cast<double>(counts[0]) + 0.5 * static_cast<double>(counts[1])) /
                static_cast<double>(n);
  });
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(values, tail), quantile_sorted(values, 1.0 - tail)};
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InputError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  require_size(x, 2, "sample variance");
  const double m = mean(x);
  double ss = 0.0;
  for (const double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "Welch t-test sample a");
  require_size(b, 2, "Welch t-test sample b");
  require_finite(a, "Welch t-test sample a");
  require_finite(b, "Welch t-test sample b");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw NumericError("Welch t statistic undefined: both samples have zero variance");

  TestResult r;
  r.statistic = (mean(a) - mean(b)) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_value = special::student_t_two_sided(r.statistic, *r.df);
  return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "Cohen's d sample a");
  require_size(b, 2, "Cohen's d sample b");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled =
      ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
  if (!(pooled > 0.0)) throw NumericError("Cohen's d undefined: zero pooled variance");
  return (mean(a) - mean(b)) / std::sqrt(pooled);
}

double ks_statistic_normal(std::span<const double> sample, double mu, double sigma) {
  if (sample.empty()) throw InputError("KS statistic of an empty sample");
  if (!(sigma > 0.0)) throw NumericError("KS statistic needs a positive standard deviation");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = special::normal_cdf((sorted[i] - mu) / sigma);
    const double i_d = static_cast<double>(i);
    d = std::max({d, (i_d + 1.0) / n - f, f - i_d / n});
  }
  return d;
}

TestResult ks_normality(std::span<const double> sample) {
  require_size(sample, 5, "KS normality test");
  require_finite(sample, "KS normality test sample");
  const double var = sample_variance(sample);
  if (!(var > 0.0)) throw NumericError("KS normality test undefined: zero sample variance");
  TestResult r;
  r.statistic = ks_statistic_normal(sample, mean(sample), std::sqrt(var));
  r.p_value = special::kolmogorov_survival(std::sqrt(static_cast<double>(sample.size())) * r.statistic);
  return r;
}

BoxplotSummary boxplot_summary(std::span<const double> sample) {
  if (sample.empty()) throw InputError("boxplot of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  BoxplotSummary b;
  b.n = sorted.size();
  b.min = sorted.front();
  b.max = sorted.back();
  b.q1 = quantile_sorted(sorted, 0.25);
  b.median = quantile_sorted(sorted, 0.5);
  b.q3 = quantile_sorted(sorted, 0.75);
  b.mean = mean(sorted);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = *std::lower_bound(sorted.begin(), sorted.end(), lo_fence);
  b.whisker_high = *(std::upper_bound(sorted.begin(), sorted.end(), hi_fence) - 1);
  for (const double v : sorted) {
    if (v < lo_fence || v > hi_fence) ++b.outliers;
  }
  return b;
}

ComparisonReport compare_populations(const PopulationStats& random_pop,
                                     const std::optional<PopulationStats>& real_pop,
                                     double generated_score, const ComparisonOptions& options) {
  require_finite(random_pop.samples, "random population");
  ComparisonReport report;
  report.generated_score = generated_score;
  report.level = options.level;
  report.random = summarize(random_pop.samples, PopulationLabel::kRandom, generated_score, options);
  if (real_pop) {
    require_finite(real_pop->samples, "real-world population");
    std::vector<double> kept;
    kept.reserve(real_pop->samples.size());
    for (const double v : real_pop->samples) {
      if (v != 0.0) kept.push_back(v);
    }
    PopulationSummary s = summarize(kept, PopulationLabel::kRealWorld, generated_score, options);
    s.zeros_removed = real_pop->samples.size() - kept.size();
    report.real = s;
    TestResult w = welch_t_test(kept, random_pop.samples);
    w.effect_size = cohens_d(kept, random_pop.samples);
    report.welch = w;
  }
  return report;
}

}  // namespace dfs
