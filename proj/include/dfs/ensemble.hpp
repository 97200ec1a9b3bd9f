#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dfs/data_pipeline.hpp"
#include "dfs/neural_model.hpp"
#include "dfs/parallel.hpp"

namespace dfs {

struct Ensemble {
  std::vector<TrainedModel> models;  // model i trained with model_seed(master_seed, i)
  int window_index = 0;
  std::uint64_t master_seed = 0;

  std::size_t size() const { return models.size(); }
};

std::uint64_t model_seed(std::uint64_t master_seed, std::size_t index);
// Seed used when model `index` diverges on its first attempt.
std::uint64_t retry_seed(std::uint64_t master_seed, std::size_t index);

Ensemble train_ensemble(const WindowDataset& dataset, std::size_t n_models,
                        std::uint64_t master_seed, const TrainingConfig& config,
                        std::size_t workers = 1);

// Empirical quantile, linear interpolation between order statistics:
// h = (n - 1) * q, result = x[floor h] + frac(h) * (x[floor h + 1] - x[floor h]).
double quantile(std::span<const double> values, double q);
double quantile_sorted(std::span<const double> sorted, double q);

struct Interval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Mean and central `level` interval of a sample.
Interval central_interval(std::span<const double> values, double level);

struct PredictionDistribution {
  std::string player_id;
  Position position = Position::QB;
  std::vector<double> samples;  // one per model, in model order
  double mean = 0.0;
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

std::vector<PredictionDistribution> predict_distribution(const Ensemble& ensemble,
                                                         const WindowDataset& predict_window,
                                                         double level,
                                                         std::size_t workers = 1);

// Per-player sample arrays keyed by player_id.
using SampleTable = std::map<std::string, std::vector<double>>;

SampleTable sample_table(std::span<const PredictionDistribution> predictions);

// Interval of per-model lineup totals: total_m = sum over players of sample[m].
Interval lineup_prediction_interval(const SampleTable& samples,
                                    std::span<const std::string> player_ids, double level);

void write_ensemble(std::ostream& out, const Ensemble& ensemble);
Ensemble read_ensemble(std::istream& in);

}  // namespace dfs
