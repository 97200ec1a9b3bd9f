// Generated datasets for model tests.
#pragma once

#include <cstdint>

#include "dfs/data_pipeline.hpp"
#include "dfs/neural_model.hpp"
#include "dfs/rng.hpp"

namespace synthetic {

// Target = 3 x0 - 2 x1 + 1.5 x2 + 4 + N(0, 0.1^2); the other 40 inputs are noise
// features on unrelated scales.
inline dfs::WindowDataset linear_target(std::size_t rows, std::uint64_t seed) {
  dfs::Rng rng(seed);
  dfs::WindowDataset ds;
  ds.window_index = 1;
  ds.target_week = 4;
  ds.has_targets = true;
  for (std::size_t i = 0; i < rows; ++i) {
    dfs::WindowRow row;
    row.player_id = "S" + std::to_string(1000 + i);
    row.position = dfs::Position::WR;
    auto& v = row.features.values;
    for (std::size_t j = 0; j < dfs::kFeatureCount; ++j) {
      v[j] = (j < 3 ? 1.0 : 1.0 + static_cast<double>(j)) * rng.normal();
    }
    row.features.target = 3.0 * v[0] - 2.0 * v[1] + 1.5 * v[2] + 4.0 + 0.1 * rng.normal();
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

// Random network with entries in [-scale, scale] and a matching batch.
struct NetAndBatch {
  dfs::Network net;
  dfs::NormStats norm;
  dfs::Batch batch;
  double l2 = 0.0;
};

inline NetAndBatch random_net_and_batch(std::uint64_t seed) {
  dfs::Rng rng(seed);
  const auto inputs = static_cast<Eigen::Index>(1 + rng.below(8));
  const auto hidden = static_cast<Eigen::Index>(1 + rng.below(6));
  const auto rows = static_cast<Eigen::Index>(1 + rng.below(12));
  NetAndBatch out;
  out.net = dfs::Network::zeros(static_cast<std::size_t>(inputs), static_cast<std::size_t>(hidden));
  for (Eigen::Index h = 0; h < hidden; ++h) {
    for (Eigen::Index j = 0; j < inputs; ++j) out.net.w1(h, j) = rng.uniform(-1.0, 1.0);
    out.net.b1(h) = rng.uniform(-1.0, 1.0);
    out.net.w2(h) = rng.uniform(-2.0, 2.0);
  }
  out.net.b2 = rng.uniform(-1.0, 1.0);
  out.norm.mean.resize(inputs);
  out.norm.std.resize(inputs);
  for (Eigen::Index j = 0; j < inputs; ++j) {
    out.norm.mean(j) = rng.uniform(-2.0, 2.0);
    out.norm.std(j) = rng.uniform(0.5, 3.0);
  }
  out.batch.x.resize(rows, inputs);
  out.batch.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < inputs; ++j) out.batch.x(i, j) = rng.uniform(-4.0, 4.0);
    out.batch.y(i) = rng.uniform(-3.0, 3.0);
  }
  out.l2 = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.05);
  return out;
}

}  // namespace synthetic
