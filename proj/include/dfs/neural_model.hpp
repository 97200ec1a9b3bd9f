#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dfs/data_pipeline.hpp"

namespace dfs {

inline constexpr std::size_t kDefaultHidden = 19;
inline constexpr double kStdFloor = 1e-8;

// inputs -> hidden (sigmoid) -> 1 (linear).
struct Network {
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden (the single output row)
  double b2 = 0.0;

  static Network zeros(std::size_t inputs, std::size_t hidden);
  // Uniform in [-r, r] with r = sqrt(6 / (fan_in + fan_out)) per layer.
  static Network glorot(std::size_t inputs, std::size_t hidden, std::uint64_t seed);

  std::size_t inputs() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }
  bool all_finite() const;

  bool operator==(const Network& other) const;
};

// Per-feature z-score statistics.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static NormStats identity(std::size_t inputs);
  // Population standard deviation over the rows of x, floored at kStdFloor.
  static NormStats fit(const Eigen::MatrixXd& x);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;

  bool operator==(const NormStats& other) const {
    return mean == other.mean && std == other.std;
  }
};

// Row-major design matrix plus targets.
struct Batch {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
};

Batch make_batch(const WindowDataset& dataset, std::span<const std::size_t> rows);
Batch make_batch(const WindowDataset& dataset);
Eigen::MatrixXd feature_matrix(const WindowDataset& dataset);

double sigmoid(double t);

// Single prediction. Throws InputError on a size mismatch or non-finite entry.
double forward(const Network& net, const NormStats& norm, std::span<const double> x);
Eigen::VectorXd forward_batch(const Network& net, const NormStats& norm,
                              const Eigen::MatrixXd& x);

double mean_squared_error(const Network& net, const NormStats& norm, const Batch& batch);

struct LossGradient {
  double loss = 0.0;
  Network gradient;
};

// MSE plus l2 * (sum of squared weights); biases are not penalized.
LossGradient loss_and_gradient(const Network& net, const NormStats& norm, const Batch& batch,
                               double l2);

struct TrainingConfig {
  std::size_t hidden = kDefaultHidden;
  double train_fraction = 0.8;
  double l2 = 1e-3;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int patience = 20;
  int max_epochs = 2000;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Uniform shuffle of row indices; the first round(n * fraction) go to training.
DataSplit split_indices(std::size_t n, double train_fraction, std::uint64_t seed);
DataSplit split_data(const WindowDataset& dataset, double train_fraction, std::uint64_t seed);

struct TrainedModel {
  Network network;
  NormStats norm;
  std::uint64_t seed = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;          // best validation MSE seen
  double initial_val_mse = 0.0;  // validation MSE of the initial weights
  int epochs_run = 0;
  int best_epoch = 0;

  double predict(std::span<const double> x) const { return forward(network, norm, x); }
  bool operator==(const TrainedModel& other) const;
};

// Full-batch gradient descent with momentum and early stopping on validation MSE.
// Split and initialization streams are derived from `seed`.
TrainedModel train(const WindowDataset& dataset, const TrainingConfig& config,
                   std::uint64_t seed);
TrainedModel train(const Batch& data, const TrainingConfig& config, std::uint64_t seed);

// Text format with hexadecimal floats; round trip is bit-exact.
void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel read_model(std::istream& in);

}  // namespace dfs
