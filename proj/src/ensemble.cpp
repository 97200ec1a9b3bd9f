#include "dfs/ensemble.hpp"

#include <algorithm>
#include <exception>
#include <istream>
#include <numeric>
#include <ostream>

#include "dfs/error.hpp"
#include "dfs/rng.hpp"

namespace dfs {

std::uint64_t model_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, index);
}

std::uint64_t retry_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(model_seed(master_seed, index), 0x5EED);
}

Ensemble train_ensemble(const WindowDataset& dataset, std::size_t n_models,
                        std::uint64_t master_seed, const TrainingConfig& config,
                        std::size_t workers) {
  if (n_models < 1) throw InputError("ensemble needs at least one model");
  if (!dataset.has_targets) throw InputError("ensemble training requires targets");

  const Batch data = make_batch(dataset);
  Ensemble ens;
  ens.window_index = dataset.window_index;
  ens.master_seed = master_seed;
  ens.models.resize(n_models);
  parallel_for(n_models, workers, [&](std::size_t i) {
    try {
      ens.models[i] = train(data, config, model_seed(master_seed, i));
    } catch (const NumericError&) {
      try {
        ens.models[i] = train(data, config, retry_seed(master_seed, i));
      } catch (const NumericError& e) {
        throw NumericError("ensemble model " + std::to_string(i) +
                           " diverged twice: " + e.what());
      }
    }
  });
  return ens;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

Interval central_interval(std::span<const double> values, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("interval level must lie in (0, 1)");
  if (values.empty()) throw InputError("interval of empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  Interval out;
  // Summed in sorted order so the result does not depend on model order.
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
             static_cast<double>(sorted.size());
  out.low = quantile_sorted(sorted, tail);
  out.high = quantile_sorted(sorted, 1.0 - tail);
  return out;
}

std::vector<PredictionDistribution> predict_distribution(const Ensemble& ensemble,
                                                         const WindowDataset& predict_window,
                                                         double level, std::size_t workers) {
  if (predict_window.has_targets) throw InputError("prediction window must not carry targets");
  if (!(level > 0.0 && level < 1.0)) throw InputError("interval level must lie in (0, 1)");
  if (ensemble.models.empty()) throw InputError("empty ensemble");

  const std::size_t n_players = predict_window.rows.size();
  const std::size_t n_models = ensemble.models.size();
  std::vector<std::vector<double>> by_model(n_models);
  parallel_for(n_models, workers, [&](std::size_t m) {
    auto& out = by_model[m];
    out.resize(n_players);
    for (std::size_t p = 0; p < n_players; ++p) {
      out[p] = ensemble.models[m].predict(predict_window.rows[p].features.values);
    }
  });

  std::vector<PredictionDistribution> result(n_players);
  for (std::size_t p = 0; p < n_players; ++p) {
    auto& d = result[p];
    d.player_id = predict_window.rows[p].player_id;
    d.position = predict_window.rows[p].position;
    d.samples.resize(n_models);
    for (std::size_t m = 0; m < n_models; ++m) d.samples[m] = by_model[m][p];
    const Interval iv = central_interval(d.samples, level);
    d.mean = iv.mean;
    d.ci_low = iv.low;
    d.ci_high = iv.high;
    d.median = quantile(d.samples, 0.5);
  }
  return result;
}

SampleTable sample_table(std::span<const PredictionDistribution> predictions) {
  SampleTable out;
  for (const auto& p : predictions) out[p.player_id] = p.samples;
  return out;
}

Interval lineup_prediction_interval(const SampleTable& samples,
                                    std::span<const std::string> player_ids, double level) {
  if (player_ids.empty()) throw InputError("lineup has no players");
  std::vector<double> totals;
  for (const auto& id : player_ids) {
    const auto it = samples.find(id);
    if (it == samples.end()) throw InputError("no prediction samples for player '" + id + "'");
    if (totals.empty()) totals.assign(it->second.size(), 0.0);
    if (it->second.size() != totals.size() || totals.empty()) {
      throw InputError("sample arrays differ in length for player '" + id + "'");
    }
    for (std::size_t m = 0; m < totals.size(); ++m) totals[m] += it->second[m];
  }
  return central_interval(totals, level);
}

void write_ensemble(std::ostream& out, const Ensemble& ensemble) {
  out << "dfs-ensemble 1\n";
  out << "window " << ensemble.window_index << '\n';
  out << "master_seed " << ensemble.master_seed << '\n';
  out << "models " << ensemble.models.size() << '\n';
  for (const auto& m : ensemble.models) write_model(out, m);
}

Ensemble read_ensemble(std::istream& in) {
  const auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
      throw InputError("ensemble file: expected '" + word + "', got '" + got + "'");
    }
  };
  Ensemble e;
  int version = 0;
  std::size_t count = 0;
  expect("dfs-ensemble");
  in >> version;
  if (version != 1) throw InputError("ensemble file: unsupported version");
  expect("window");
  in >> e.window_index;
  expect("master_seed");
  in >> e.master_seed;
  expect("models");
  if (!(in >> count) || count == 0) throw InputError("ensemble file: bad model count");
  e.models.reserve(count);
  for (std::size_t i = 0; i < count; ++i) e.models.push_back(read_model(in));
  return e;
}

}  // namespace dfs
