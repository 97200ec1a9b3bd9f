#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfs/ensemble.hpp"
#include "dfs/lineup_optimizer.hpp"
#include "dfs/neural_model.hpp"
#include "dfs/validation_stats.hpp"

namespace dfs {

struct RunConfig {
  // Relative paths are resolved against the config file's directory.
  std::filesystem::path players_csv = "players.csv";
  std::filesystem::path exclusions;       // optional
  std::filesystem::path contest_results;  // optional
  std::filesystem::path output_dir = "out";

  int target_week = 6;

  std::size_t n_models = 200;
  std::uint64_t master_seed = 2018;
  std::size_t workers = 1;
  double interval_level = 0.95;

  TrainingConfig training;
  ContestRules rules;

  std::size_t random_count = 35000;
  int min_salary = kDefaultMinSalary;
  std::optional<FlexConfig> random_flex;  // nullopt: uniform over the three

  std::size_t bootstrap_resamples = 10000;
  double histogram_bin_width = 2.0;

  bool verbose = false;

  void validate() const;  // throws InputError
};

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

// Named random streams, all derived from the master seed.
enum class SeedStream : std::uint64_t { kRandomBaseline = 1, kBootstrap = 2 };
std::uint64_t stream_seed(std::uint64_t master_seed, SeedStream stream);

// Window indices used for forecasting `target_week`.
int training_window_for(int target_week);
int prediction_window_for(int target_week);

// Files produced by one subcommand. Nothing touches the output directory until
// commit(), which writes every file through a temporary and renames it.
class ArtifactSet {
 public:
  void add(const std::string& name, std::string content);
  const std::map<std::string, std::string>& files() const { return files_; }
  void commit(const std::filesystem::path& dir) const;

 private:
  std::map<std::string, std::string> files_;
};

// Dataset files: player_id,position,f01..f43[,target]
std::string write_dataset_csv(const WindowDataset& dataset);
WindowDataset read_dataset_csv(std::string_view text, const std::string& source);

std::string write_predictions_csv(std::span<const PredictionDistribution> predictions,
                                  const std::map<std::string, int>& salaries);
std::string write_samples_csv(std::span<const PredictionDistribution> predictions);
SampleTable read_samples_csv(std::string_view text, const std::string& source);

struct PredictionRow {
  std::string player_id;
  Position position = Position::QB;
  int salary = 0;
  double mean_fpts = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
std::vector<PredictionRow> read_predictions_csv(std::string_view text, const std::string& source);

std::vector<double> read_contest_results(const std::filesystem::path& path);

// Per-player histogram of ensemble predictions with the actual-FPTS marker.
struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};
std::vector<HistogramBin> histogram(std::span<const double> samples, double bin_width);

ArtifactSet run_ingest(const RunConfig& config);
ArtifactSet run_predict(const RunConfig& config);
ArtifactSet run_optimize(const RunConfig& config);
ArtifactSet run_validate(const RunConfig& config);
ArtifactSet run_report(const RunConfig& config);

// Each runs its stage and commits the artifacts to config.output_dir.
void cmd_ingest(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_optimize(const RunConfig& config);
void cmd_validate(const RunConfig& config);
// Returns the human-readable summary it writes to report.txt.
std::string cmd_report(const RunConfig& config);

}  // namespace dfs
