#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfs/lineup_optimizer.hpp"

namespace dfs {

enum class PopulationLabel { kRandom, kRealWorld };
std::string_view to_string(PopulationLabel label);

struct PopulationStats {
  std::vector<double> samples;
  PopulationLabel label = PopulationLabel::kRandom;

  std::size_t n() const { return samples.size(); }
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> df;
  std::optional<double> effect_size;
};

inline constexpr int kDefaultMinSalary = 45000;
inline constexpr int kMaxRejections = 10000;

struct RandomLineupOptions {
  int min_salary = kDefaultMinSalary;
  int max_rejections = kMaxRejections;
  // Drawn uniformly per attempt unless fixed.
  std::optional<FlexConfig> flex;
};

// Uniform slot-wise draw without replacement, rejected until the total salary
// lies in [min_salary, salary_cap]. Every pool entry must carry actual FPTS > 0.
Lineup random_lineup(std::span<const Candidate> pool, const ContestRules& rules,
                     const RandomLineupOptions& options, std::uint64_t seed);

// `count` independent draws; draw i uses derive_seed(seed, i).
std::vector<Lineup> random_lineups(std::span<const Candidate> pool, const ContestRules& rules,
                                   const RandomLineupOptions& options, std::size_t count,
                                   std::uint64_t seed, std::size_t workers = 1);

PopulationStats random_population(std::span<const Candidate> pool, const ContestRules& rules,
                                  const RandomLineupOptions& options, std::size_t count,
                                  std::uint64_t seed, std::size_t workers = 1);

// Mid-rank percentile: 100 * (#below + 0.5 * #equal) / n.
double percentile(double score, std::span<const double> population);

struct PercentileCi {
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap: resample the population with replacement, recompute the
// score's percentile, report central `level` bounds. Resample r uses
// derive_seed(seed, r).
PercentileCi bootstrap_ci(double score, std::span<const double> population, std::size_t resamples,
                          double level, std::uint64_t seed, std::size_t workers = 1);

double mean(std::span<const double> x);
// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> x);

// Two-sided Welch t-test of mean(a) - mean(b) with Welch-Satterthwaite df.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

// (mean(a) - mean(b)) / pooled standard deviation.
double cohens_d(std::span<const double> a, std::span<const double> b);

// sup |F_n(x) - Phi((x - mu) / sigma)| over the sample's jump points.
double ks_statistic_normal(std::span<const double> sample, double mu, double sigma);

// One-sample KS test against a normal with moments fitted from the sample. The
// p-value uses the limiting Kolmogorov distribution of sqrt(n) * D and ignores
// the effect of estimating the parameters, so it is conservative.
TestResult ks_normality(std::span<const double> sample);

struct BoxplotSummary {
  double min = 0.0;
  double whisker_low = 0.0;  // smallest sample >= q1 - 1.5 IQR
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_high = 0.0;  // largest sample <= q3 + 1.5 IQR
  double max = 0.0;
  double mean = 0.0;
  std::size_t n = 0;
  std::size_t outliers = 0;
};

BoxplotSummary boxplot_summary(std::span<const double> sample);

struct ComparisonOptions {
  std::size_t resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct PopulationSummary {
  PopulationLabel label = PopulationLabel::kRandom;
  std::size_t n = 0;
  std::size_t zeros_removed = 0;
  double mean = 0.0;
  double sd = 0.0;
  double range_low = 0.0;  // central `level` range of the population itself
  double range_high = 0.0;
  double percentile = 0.0;  // of the generated score
  PercentileCi percentile_ci;
  TestResult ks;
  BoxplotSummary box;
};

struct ComparisonReport {
  double generated_score = 0.0;
  double level = 0.95;
  PopulationSummary random;
  std::optional<PopulationSummary> real;
  std::optional<TestResult> welch;  // real vs random; effect_size holds Cohen's d
};

// Zero scores are dropped from the real-world population before any statistic.
ComparisonReport compare_populations(const PopulationStats& random_pop,
                                     const std::optional<PopulationStats>& real_pop,
                                     double generated_score, const ComparisonOptions& options);

}  // namespace dfs
