#include "dfs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dfs/error.hpp"
#include "dfs/parallel.hpp"
#include "dfs/rng.hpp"
#include "dfs/text_io.hpp"

namespace dfs {

namespace {

using nlohmann::json;

const std::filesystem::path kTrainWindowFile = "train_window.csv";
const std::filesystem::path kPredictWindowFile = "predict_window.csv";
const std::filesystem::path kEligibilityFile = "eligibility.csv";
const std::filesystem::path kPredictionsFile = "predictions.csv";
const std::filesystem::path kSamplesFile = "samples.csv";
const std::filesystem::path kEnsembleFile = "ensemble.txt";
const std::filesystem::path kLineupFile = "lineup.csv";
const std::filesystem::path kLineupSummaryFile = "lineup_summary.csv";
const std::filesystem::path kModelLineupsFile = "model_lineups.csv";

void log(const RunConfig& config, const std::string& message) {
  if (config.verbose) std::clog << message << '\n';
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string read_artifact(const RunConfig& config, const std::filesystem::path& name) {
  const auto path = config.output_dir / name;
  if (!std::filesystem::exists(path)) {
    throw InputError("missing artifact '" + path.string() + "'; run the earlier stage first");
  }
  return text::read_file(path);
}

std::string opt_double(const std::optional<double>& v) {
  return v ? text::format_double(*v) : std::string();
}

template <typename T>
void read_key(const json& section, const char* key, T& out, const std::string& where) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError("config " + where + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& section, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!section.is_object()) throw InputError("config section '" + where + "' must be an object");
  for (const auto& [k, _] : section.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; })) {
      throw InputError("config: unknown key '" + where + "." + k + "'");
    }
  }
}

std::map<std::string, double> actuals_for_week(const SeasonTable& table, int week) {
  std::map<std::string, double> out;
  for (const auto& [key, r] : table) {
    if (key.second == week && r.fpts) out[r.player_id] = *r.fpts;
  }
  return out;
}

struct LineupSummaryRow {
  int week = 0;
  std::string flex;
  int total_salary = 0;
  Interval interval;
  double level = 0.0;
};

LineupSummaryRow read_lineup_summary(std::string_view content, const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.size() < 2) throw ParseError(source, 1, "week", "missing summary row");
  const auto f = text::split(rows[1]);
  if (f.size() < 7) throw ParseError(source, 2, "week", "expected at least 7 fields");
  LineupSummaryRow out;
  const auto week = text::parse_int(f[0]);
  const auto salary = text::parse_int(f[2]);
  const auto mean = text::parse_double(f[3]);
  const auto low = text::parse_double(f[4]);
  const auto high = text::parse_double(f[5]);
  const auto level = text::parse_double(f[6]);
  if (!week || !salary || !mean || !low || !high || !level) {
    throw ParseError(source, 2, "week", "malformed summary row");
  }
  out.week = static_cast<int>(*week);
  out.flex = std::string(f[1]);
  out.total_salary = static_cast<int>(*salary);
  out.interval = {*mean, *low, *high};
  out.level = *level;
  return out;
}

std::string format_table(std::string_view csv) {
  std::vector<std::vector<std::string>> cells;
  for (const auto line : text::lines(csv)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    for (const auto field : text::split(line)) row.emplace_back(field);
    cells.push_back(std::move(row));
  }
  // Counts, weeks and salaries print as-is; every other number gets two decimals.
  static const std::set<std::string, std::less<>> kIntegerColumns = {
      "week",  "salary", "total_salary", "random_lineups", "users",          "zeros_removed",
      "n",     "outliers", "n_models",   "modal_count",    "distinct_lineups", "count"};
  std::vector<bool> fractional;
  if (!cells.empty()) {
    for (const auto& name : cells[0]) fractional.push_back(!kIntegerColumns.contains(name));
  }
  fractional.resize(std::max<std::size_t>(fractional.size(), 64), true);
  for (std::size_t r = 1; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const auto v = text::parse_double(cells[r][c]);
      if (!v || !fractional[c]) continue;
      if (*v != 0.0 && std::abs(*v) < 0.01) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2e", *v);
        cells[r][c] = buf;
      } else {
        cells[r][c] = text::format_fixed(*v, 2);
      }
    }
  }
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += (c ? "  " : "") + row[c] + std::string(width[c] - row[c].size(), ' ');
    }
    line.erase(line.find_last_not_of(' ') + 1);
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

void RunConfig::validate() const {
  if (players_csv.empty()) throw InputError("config: paths.players is required");
  if (target_week < kFirstWeek + kMinGamesInLookback || target_week > kLastWeek) {
    throw InputError("config: target_week must lie in [5, 17]");
  }
  if (n_models < 1) throw InputError("config: n_models must be at least 1");
  if (workers < 1) throw InputError("config: workers must be at least 1");
  if (!(interval_level > 0.0 && interval_level < 1.0)) {
    throw InputError("config: interval_level must lie in (0, 1)");
  }
  if (training.hidden < 1) throw InputError("config: training.hidden must be at least 1");
  if (!(training.train_fraction > 0.0 && training.train_fraction < 1.0)) {
    throw InputError("config: training.train_fraction must lie in (0, 1)");
  }
  if (training.l2 < 0.0 || !(training.learning_rate > 0.0) || training.momentum < 0.0 ||
      training.momentum >= 1.0 || training.patience < 0 || training.max_epochs < 0) {
    throw InputError("config: training hyperparameters out of range");
  }
  if (rules.salary_cap < 0) throw InputError("config: rules.salary_cap must be non-negative");
  if (random_count < 2) throw InputError("config: baseline.count must be at least 2");
  if (bootstrap_resamples < 1) throw InputError("config: report.bootstrap_resamples must be >= 1");
  if (!(histogram_bin_width > 0.0)) throw InputError("config: report.histogram_bin_width must be positive");
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"paths", "season", "ensemble", "training", "rules", "baseline", "report"},
                 "config");

  RunConfig c;
  const json empty = json::object();
  const auto section = [&](const char* name) -> const json& {
    return doc.contains(name) ? doc.at(name) : empty;
  };

  const json& paths = section("paths");
  reject_unknown(paths, {"players", "exclusions", "contest_results", "output_dir"}, "paths");
  std::string players = c.players_csv.string(), exclusions, contest, out = c.output_dir.string();
  read_key(paths, "players", players, "paths");
  read_key(paths, "exclusions", exclusions, "paths");
  read_key(paths, "contest_results", contest, "paths");
  read_key(paths, "output_dir", out, "paths");
  c.players_csv = resolve(base_dir, players);
  c.exclusions = resolve(base_dir, exclusions);
  c.contest_results = resolve(base_dir, contest);
  c.output_dir = resolve(base_dir, out);

  const json& season = section("season");
  reject_unknown(season, {"target_week"}, "season");
  read_key(season, "target_week", c.target_week, "season");

  const json& ens = section("ensemble");
  reject_unknown(ens, {"n_models", "master_seed", "workers", "interval_level"}, "ensemble");
  read_key(ens, "n_models", c.n_models, "ensemble");
  read_key(ens, "master_seed", c.master_seed, "ensemble");
  read_key(ens, "workers", c.workers, "ensemble");
  read_key(ens, "interval_level", c.interval_level, "ensemble");

  const json& tr = section("training");
  reject_unknown(tr, {"hidden", "train_fraction", "l2", "learning_rate", "momentum", "patience",
                      "max_epochs"},
                 "training");
  read_key(tr, "hidden", c.training.hidden, "training");
  read_key(tr, "train_fraction", c.training.train_fraction, "training");
  read_key(tr, "l2", c.training.l2, "training");
  read_key(tr, "learning_rate", c.training.learning_rate, "training");
  read_key(tr, "momentum", c.training.momentum, "training");
  read_key(tr, "patience", c.training.patience, "training");
  read_key(tr, "max_epochs", c.training.max_epochs, "training");

  const json& rules = section("rules");
  reject_unknown(rules, {"salary_cap", "require_two_teams"}, "rules");
  read_key(rules, "salary_cap", c.rules.salary_cap, "rules");
  read_key(rules, "require_two_teams", c.rules.require_two_teams, "rules");

  const json& base = section("baseline");
  reject_unknown(base, {"count", "min_salary", "flex"}, "baseline");
  read_key(base, "count", c.random_count, "baseline");
  read_key(base, "min_salary", c.min_salary, "baseline");
  std::string flex = "uniform";
  read_key(base, "flex", flex, "baseline");
  if (flex != "uniform") {
    c.random_flex = parse_flex(flex);
    if (!c.random_flex) throw InputError("config: baseline.flex must be uniform, 2/3/2, 2/4/1 or 3/3/1");
  }

  const json& rep = section("report");
  reject_unknown(rep, {"bootstrap_resamples", "histogram_bin_width"}, "report");
  read_key(rep, "bootstrap_resamples", c.bootstrap_resamples, "report");
  read_key(rep, "histogram_bin_width", c.histogram_bin_width, "report");

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(text::read_file(path), path.parent_path());
}

std::string config_to_json(const RunConfig& c) {
  json doc;
  doc["paths"] = {{"players", c.players_csv.string()},
                  {"exclusions", c.exclusions.string()},
                  {"contest_results", c.contest_results.string()},
                  {"output_dir", c.output_dir.string()}};
  doc["season"] = {{"target_week", c.target_week}};
  doc["ensemble"] = {{"n_models", c.n_models},
                     {"master_seed", c.master_seed},
                     {"workers", c.workers},
                     {"interval_level", c.interval_level}};
  doc["training"] = {{"hidden", c.training.hidden},
                     {"train_fraction", c.training.train_fraction},
                     {"l2", c.training.l2},
                     {"learning_rate", c.training.learning_rate},
                     {"momentum", c.training.momentum},
                     {"patience", c.training.patience},
                     {"max_epochs", c.training.max_epochs}};
  doc["rules"] = {{"salary_cap", c.rules.salary_cap},
                  {"require_two_teams", c.rules.require_two_teams}};
  doc["baseline"] = {{"count", c.random_count},
                     {"min_salary", c.min_salary},
                     {"flex", c.random_flex ? to_string(*c.random_flex) : std::string("uniform")}};
  doc["report"] = {{"bootstrap_resamples", c.bootstrap_resamples},
                   {"histogram_bin_width", c.histogram_bin_width}};
  return doc.dump(2) + "\n";
}

std::uint64_t stream_seed(std::uint64_t master_seed, SeedStream stream) {
  // Indices counted down from the top never collide with per-model indices.
  return derive_seed(master_seed, UINT64_MAX - static_cast<std::uint64_t>(stream));
}

int training_window_for(int target_week) { return target_week - 4; }
int prediction_window_for(int target_week) { return target_week - 3; }

void ArtifactSet::add(const std::string& name, std::string content) {
  files_[name] = std::move(content);
}

void ArtifactSet::commit(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "'");
  std::vector<std::filesystem::path> staged;
  const auto cleanup = [&] {
    for (const auto& p : staged) std::filesystem::remove(p, ec);
  };
  for (const auto& [name, content] : files_) {
    const auto tmp = dir / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    staged.push_back(tmp);
    if (!(out << content) || !out.flush()) {
      cleanup();
      throw InputError("cannot write '" + tmp.string() + "'");
    }
  }
  // Existing outputs are moved aside first so a failed rename can be undone.
  std::vector<std::pair<std::filesystem::path, bool>> placed;  // target, had a backup
  const auto rollback = [&] {
    for (const auto& [target, had_backup] : placed) {
      std::filesystem::remove(target, ec);
      if (had_backup) std::filesystem::rename(target.string() + ".bak", target, ec);
    }
    cleanup();
  };
  for (const auto& [name, _] : files_) {
    const auto target = dir / name;
    std::error_code probe;
    const bool had_backup = std::filesystem::is_regular_file(target, probe);
    ec.clear();
    if (had_backup) std::filesystem::rename(target, target.string() + ".bak", ec);
    if (!ec) std::filesystem::rename(dir / (name + ".tmp"), target, ec);
    if (ec) {
      if (had_backup) std::filesystem::rename(target.string() + ".bak", target, ec);
      rollback();
      throw InputError("cannot finalize '" + target.string() + "'");
    }
    placed.emplace_back(target, had_backup);
  }
  for (const auto& [target, had_backup] : placed) {
    if (had_backup) std::filesystem::remove(target.string() + ".bak", ec);
  }
}

std::string write_dataset_csv(const WindowDataset& ds) {
  std::ostringstream out;
  out << "# window=" << ds.window_index << " target_week=" << ds.target_week
      << " mode=" << (ds.has_targets ? "train" : "predict") << '\n';
  out << "player_id,position";
  for (std::size_t i = 1; i <= kFeatureCount; ++i) out << ",f" << (i < 10 ? "0" : "") << i;
  if (ds.has_targets) out << ",target";
  out << '\n';
  for (const auto& row : ds.rows) {
    out << row.player_id << ',' << to_string(row.position);
    for (const double v : row.features.values) out << ',' << text::format_double(v);
    if (ds.has_targets) out << ',' << text::format_double(*row.features.target);
    out << '\n';
  }
  return out.str();
}

WindowDataset read_dataset_csv(std::string_view content, const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.size() < 2) throw ParseError(source, 1, "player_id", "missing dataset header");
  WindowDataset ds;
  std::string mode;
  {
    std::istringstream meta{std::string(rows[0])};
    std::string hash, window, target, mode_kv;
    meta >> hash >> window >> target >> mode_kv;
    const auto value = [](const std::string& kv, const std::string& key) -> std::string {
      return kv.rfind(key + "=", 0) == 0 ? kv.substr(key.size() + 1) : std::string();
    };
    const auto w = text::parse_int(value(window, "window"));
    const auto t = text::parse_int(value(target, "target_week"));
    mode = value(mode_kv, "mode");
    if (hash != "#" || !w || !t || (mode != "train" && mode != "predict")) {
      throw ParseError(source, 1, "player_id", "malformed dataset metadata line");
    }
    ds.window_index = static_cast<int>(*w);
    ds.target_week = static_cast<int>(*t);
    ds.has_targets = mode == "train";
  }
  const std::size_t width = 2 + kFeatureCount + (ds.has_targets ? 1 : 0);
  if (text::split(rows[1]).size() != width) {
    throw ParseError(source, 2, "player_id", "dataset header has the wrong width");
  }
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i].empty()) continue;
    const auto f = text::split(rows[i]);
    if (f.size() != width) throw ParseError(source, i + 1, "player_id", "wrong field count");
    WindowRow row;
    row.player_id = std::string(f[0]);
    const auto pos = parse_position(f[1]);
    if (!pos) throw ParseError(source, i + 1, "position", "unknown position");
    row.position = *pos;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const auto v = text::parse_double(f[2 + c]);
      if (!v) throw ParseError(source, i + 1, "f" + std::to_string(c + 1), "expected a real number");
      row.features.values[c] = *v;
    }
    if (ds.has_targets) {
      row.features.target = text::parse_double(f.back());
      if (!row.features.target) throw ParseError(source, i + 1, "target", "expected a real number");
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

std::string write_predictions_csv(std::span<const PredictionDistribution> predictions,
                                  const std::map<std::string, int>& salaries) {
  std::ostringstream out;
  out << "player_id,position,salary,mean_fpts,ci_low,ci_high\n";
  for (const auto& p : predictions) {
    const auto it = salaries.find(p.player_id);
    out << p.player_id << ',' << to_string(p.position) << ','
        << (it == salaries.end() ? 0 : it->second) << ',' << text::format_double(p.mean) << ','
        << text::format_double(p.ci_low) << ',' << text::format_double(p.ci_high) << '\n';
  }
  return out.str();
}

std::vector<PredictionRow> read_predictions_csv(std::string_view content,
                                                const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.empty() || rows[0] != "player_id,position,salary,mean_fpts,ci_low,ci_high") {
    throw ParseError(source, 1, "player_id", "header does not match the predictions schema");
  }
  std::vector<PredictionRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty()) continue;
    const auto f = text::split(rows[i]);
    if (f.size() != 6) throw ParseError(source, i + 1, "player_id", "expected 6 fields");
    PredictionRow r;
    r.player_id = std::string(f[0]);
    const auto pos = parse_position(f[1]);
    const auto salary = text::parse_int(f[2]);
    const auto mean = text::parse_double(f[3]);
    const auto lo = text::parse_double(f[4]);
    const auto hi = text::parse_double(f[5]);
    if (!pos) throw ParseError(source, i + 1, "position", "unknown position");
    if (!salary) throw ParseError(source, i + 1, "salary", "expected an integer");
    if (!mean || !lo || !hi) throw ParseError(source, i + 1, "mean_fpts", "expected a real number");
    r.position = *pos;
    r.salary = static_cast<int>(*salary);
    r.mean_fpts = *mean;
    r.ci_low = *lo;
    r.ci_high = *hi;
    out.push_back(std::move(r));
  }
  return out;
}

std::string write_samples_csv(std::span<const PredictionDistribution> predictions) {
  std::ostringstream out;
  out << "player_id";
  const std::size_t n = predictions.empty() ? 0 : predictions.front().samples.size();
  for (std::size_t m = 0; m < n; ++m) out << ",m" << m;
  out << '\n';
  for (const auto& p : predictions) {
    out << p.player_id;
    for (const double v : p.samples) out << ',' << text::format_double(v);
    out << '\n';
  }
  return out.str();
}

SampleTable read_samples_csv(std::string_view content, const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.empty()) throw ParseError(source, 1, "player_id", "missing header");
  const auto header = text::split(rows[0]);
  if (header.empty() || header[0] != "player_id" || header.size() < 2) {
    throw ParseError(source, 1, "player_id", "header does not match the samples schema");
  }
  SampleTable out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty()) continue;
    const auto f = text::split(rows[i]);
    if (f.size() != header.size()) throw ParseError(source, i + 1, "player_id", "wrong field count");
    std::vector<double> samples;
    samples.reserve(f.size() - 1);
    for (std::size_t c = 1; c < f.size(); ++c) {
      const auto v = text::parse_double(f[c]);
      if (!v) throw ParseError(source, i + 1, std::string(header[c]), "expected a real number");
      samples.push_back(*v);
    }
    out[std::string(f[0])] = std::move(samples);
  }
  return out;
}

std::vector<double> read_contest_results(const std::filesystem::path& path) {
  const std::string content = text::read_file(path);
  const auto rows = text::lines(content);
  if (rows.empty() || text::trim(rows[0]) != "user_rank,fpts") {
    throw ParseError(path.string(), 1, "user_rank", "header does not match the contest schema");
  }
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto f = text::split(rows[i]);
    if (f.size() != 2) throw ParseError(path.string(), i + 1, "user_rank", "expected 2 fields");
    if (!text::parse_int(f[0])) throw ParseError(path.string(), i + 1, "user_rank", "expected an integer");
    const auto v = text::parse_double(f[1]);
    if (!v) throw ParseError(path.string(), i + 1, "fpts", "expected a real number");
    out.push_back(*v);
  }
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> samples, double bin_width) {
  if (samples.empty()) return {};
  if (!(bin_width > 0.0)) throw InputError("histogram bin width must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double start = std::floor(*lo_it / bin_width) * bin_width;
  const auto bins = static_cast<std::size_t>(std::floor((*hi_it - start) / bin_width)) + 1;
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].low = start + static_cast<double>(i) * bin_width;
    out[i].high = start + static_cast<double>(i + 1) * bin_width;
  }
  for (const double v : samples) {
    auto idx = static_cast<std::size_t>(std::floor((v - start) / bin_width));
    out[std::min(idx, bins - 1)].count++;
  }
  return out;
}

ArtifactSet run_ingest(const RunConfig& config) {
  config.validate();
  const SeasonTable table = load_player_weeks(config.players_csv);
  WindowDataset train = build_window(table, training_window_for(config.target_week), WindowMode::kTrain);
  WindowDataset predict =
      build_window(table, prediction_window_for(config.target_week), WindowMode::kPredict);
  if (!config.exclusions.empty()) apply_exclusions(predict, load_exclusions(config.exclusions));
  if (train.rows.size() < 2) throw InputError("training window has fewer than 2 usable players");
  if (predict.rows.empty()) throw InputError("prediction window has no usable players");

  std::ostringstream elig;
  elig << "player_id,window,mode,status,reason\n";
  for (const auto* ds : {&train, &predict}) {
    const char* mode = ds->has_targets ? "train" : "predict";
    for (const auto& row : ds->rows) {
      elig << row.player_id << ',' << ds->window_index << ',' << mode << ",included,\n";
    }
    for (const auto& ex : ds->excluded) {
      elig << ex.player_id << ',' << ds->window_index << ',' << mode << ",excluded," << ex.reason
           << '\n';
      log(config, "window " + std::to_string(ds->window_index) + " " + mode + ": excluded " +
                      ex.player_id + " (" + ex.reason + ")");
    }
  }
  log(config, "training rows: " + std::to_string(train.rows.size()) +
                  ", prediction rows: " + std::to_string(predict.rows.size()));

  ArtifactSet out;
  out.add(kTrainWindowFile.string(), write_dataset_csv(train));
  out.add(kPredictWindowFile.string(), write_dataset_csv(predict));
  out.add(kEligibilityFile.string(), elig.str());
  return out;
}

ArtifactSet run_predict(const RunConfig& config) {
  config.validate();
  const WindowDataset train = read_dataset_csv(read_artifact(config, kTrainWindowFile),
                                               (config.output_dir / kTrainWindowFile).string());
  const WindowDataset predict = read_dataset_csv(read_artifact(config, kPredictWindowFile),
                                                 (config.output_dir / kPredictWindowFile).string());
  if (!train.has_targets || predict.has_targets) {
    throw InputError("dataset files are in the wrong mode");
  }
  const SeasonTable table = load_player_weeks(config.players_csv);

  const Ensemble ens =
      train_ensemble(train, config.n_models, config.master_seed, config.training, config.workers);
  const auto predictions = predict_distribution(ens, predict, config.interval_level, config.workers);

  std::map<std::string, int> salaries;
  for (const auto& p : predictions) {
    const auto* r = table.find(p.player_id, predict.target_week);
    if (r) salaries[p.player_id] = r->salary;
  }
  log(config, "trained " + std::to_string(ens.size()) + " models on " +
                  std::to_string(train.rows.size()) + " rows");

  std::ostringstream model_text;
  write_ensemble(model_text, ens);
  ArtifactSet out;
  out.add(kPredictionsFile.string(), write_predictions_csv(predictions, salaries));
  out.add(kSamplesFile.string(), write_samples_csv(predictions));
  out.add(kEnsembleFile.string(), model_text.str());
  return out;
}

ArtifactSet run_optimize(const RunConfig& config) {
  config.validate();
  const auto rows = read_predictions_csv(read_artifact(config, kPredictionsFile),
                                         (config.output_dir / kPredictionsFile).string());
  const SampleTable samples = read_samples_csv(read_artifact(config, kSamplesFile),
                                               (config.output_dir / kSamplesFile).string());
  const SeasonTable table = load_player_weeks(config.players_csv);
  const int week = config.target_week;

  std::vector<Candidate> base;
  std::size_t n_models = 0;
  for (const auto& r : rows) {
    const auto it = samples.find(r.player_id);
    if (it == samples.end()) throw InputError("no samples for predicted player '" + r.player_id + "'");
    if (n_models == 0) n_models = it->second.size();
    if (it->second.size() != n_models) throw InputError("sample arrays differ in length");
    Candidate c;
    c.player_id = r.player_id;
    c.position = r.position;
    c.salary = r.salary;
    c.predicted_fpts = r.mean_fpts;
    if (const auto* rec = table.find(r.player_id, week)) {
      c.team = rec->team;
      c.actual_fpts = rec->fpts;
    }
    base.push_back(std::move(c));
  }
  if (base.empty()) throw InputError("no predicted players to optimize over");

  std::vector<Lineup> lineups(n_models);
  parallel_for(n_models, config.workers, [&](std::size_t m) {
    std::vector<Candidate> pool = base;
    for (auto& c : pool) c.predicted_fpts = samples.at(c.player_id)[m];
    lineups[m] = optimize_all_flex(pool, config.rules);
  });
  const ModalSummary modal = modal_summary(lineups);

  std::vector<const Candidate*> picked;
  for (const auto& id : modal.lineup.player_ids()) {
    picked.push_back(&*std::find_if(base.begin(), base.end(),
                                    [&](const Candidate& c) { return c.player_id == id; }));
  }
  const Lineup lineup = make_lineup(picked, modal.lineup.flex);
  const auto ids = lineup.player_ids();
  const Interval iv = lineup_prediction_interval(samples, ids, config.interval_level);
  log(config, "modal lineup generated by " + std::to_string(modal.count) + " of " +
                  std::to_string(n_models) + " models (" + std::to_string(modal.distinct) +
                  " distinct)");

  std::ostringstream lineup_csv;
  write_lineup_csv(lineup_csv, lineup);

  std::ostringstream summary;
  summary << "week,flex_config,total_salary,predicted_fpts,ci_low,ci_high,level,n_models,"
             "modal_count,distinct_lineups\n";
  summary << week << ',' << to_string(lineup.flex) << ',' << lineup.total_salary << ','
          << text::format_double(iv.mean) << ',' << text::format_double(iv.low) << ','
          << text::format_double(iv.high) << ',' << text::format_double(config.interval_level)
          << ',' << n_models << ',' << modal.count << ',' << modal.distinct << '\n';

  std::ostringstream per_model;
  per_model << "model,flex_config,total_salary,predicted_fpts,player_ids\n";
  for (std::size_t m = 0; m < lineups.size(); ++m) {
    const auto& l = lineups[m];
    per_model << m << ',' << to_string(l.flex) << ',' << l.total_salary << ','
              << text::format_double(l.predicted_fpts) << ',';
    const auto lids = l.player_ids();
    for (std::size_t i = 0; i < lids.size(); ++i) per_model << (i ? ";" : "") << lids[i];
    per_model << '\n';
  }

  ArtifactSet out;
  out.add(kLineupFile.string(), lineup_csv.str());
  out.add(kLineupSummaryFile.string(), summary.str());
  out.add(kModelLineupsFile.string(), per_model.str());
  return out;
}

ArtifactSet run_validate(const RunConfig& config) {
  config.validate();
  const Lineup lineup = read_lineup_csv(read_artifact(config, kLineupFile),
                                        (config.output_dir / kLineupFile).string());
  const LineupSummaryRow summary = read_lineup_summary(
      read_artifact(config, kLineupSummaryFile), (config.output_dir / kLineupSummaryFile).string());
  const SampleTable samples = read_samples_csv(read_artifact(config, kSamplesFile),
                                               (config.output_dir / kSamplesFile).string());
  const SeasonTable table = load_player_weeks(config.players_csv);
  const int week = config.target_week;
  const auto actuals = actuals_for_week(table, week);
  const auto missing = missing_actuals(lineup, actuals);

  ArtifactSet out;

  std::ostringstream hist;
  hist << "player_id,slot,bin_low,bin_high,count,actual_fpts\n";
  for (const auto& slot : lineup.slots) {
    const auto it = samples.find(slot.player_id);
    if (it == samples.end()) throw InputError("no samples for drafted player '" + slot.player_id + "'");
    const auto a = actuals.find(slot.player_id);
    const std::string marker = a == actuals.end() ? std::string() : text::format_double(a->second);
    for (const auto& bin : histogram(it->second, config.histogram_bin_width)) {
      hist << slot.player_id << ',' << slot.slot << ',' << text::format_double(bin.low) << ','
           << text::format_double(bin.high) << ',' << bin.count << ',' << marker << '\n';
    }
  }
  out.add("histograms.csv", hist.str());

  std::ostringstream result_csv;
  result_csv << "week,status,predicted_fpts,ci_low,ci_high,level,actual_fpts,flex_config,total_salary,"
        "missing_players\n";
  const auto result_row = [&](const std::string& status, const std::string& actual) {
    std::string missing_list;
    for (std::size_t i = 0; i < missing.size(); ++i) missing_list += (i ? ";" : "") + missing[i];
    result_csv << week << ',' << status << ',' << text::format_double(summary.interval.mean) << ','
       << text::format_double(summary.interval.low) << ','
       << text::format_double(summary.interval.high) << ',' << text::format_double(summary.level)
       << ',' << actual << ',' << to_string(lineup.flex) << ',' << lineup.total_salary << ','
       << missing_list << '\n';
  };
  if (!missing.empty()) {
    log(config, "week " + std::to_string(week) + " invalid: no actual FPTS for " + missing.front());
    result_row("invalid_week", "");
    out.add("lineup_result.csv", result_csv.str());
    return out;
  }
  const double score = score_lineup(lineup, actuals);
  result_row("valid", text::format_double(score));
  out.add("lineup_result.csv", result_csv.str());

  if (config.min_salary > config.rules.salary_cap) {
    throw InputError("config: baseline.min_salary exceeds rules.salary_cap");
  }
  std::vector<Candidate> pool;
  for (const auto& [key, r] : table) {
    if (key.second != week || !r.draftable || r.salary <= 0 || !r.fpts || !(*r.fpts > 0.0)) continue;
    Candidate c;
    c.player_id = r.player_id;
    c.position = r.position;
    c.salary = r.salary;
    c.team = r.team;
    c.actual_fpts = r.fpts;
    pool.push_back(std::move(c));
  }
  RandomLineupOptions ropts;
  ropts.min_salary = config.min_salary;
  ropts.flex = config.random_flex;
  const PopulationStats random_pop =
      random_population(pool, config.rules, ropts, config.random_count,
                        stream_seed(config.master_seed, SeedStream::kRandomBaseline), config.workers);

  std::optional<PopulationStats> real_pop;
  if (!config.contest_results.empty()) {
    real_pop = PopulationStats{read_contest_results(config.contest_results), PopulationLabel::kRealWorld};
  }
  ComparisonOptions copts;
  copts.resamples = config.bootstrap_resamples;
  copts.level = config.interval_level;
  copts.seed = stream_seed(config.master_seed, SeedStream::kBootstrap);
  copts.workers = config.workers;
  const ComparisonReport report = compare_populations(random_pop, real_pop, score, copts);

  const auto f = [](double v) { return text::format_double(v); };
  std::ostringstream random_csv;
  random_csv << "week,fpts,percentile,ci_low,ci_high,level,random_lineups\n";
  random_csv << week << ',' << f(score) << ',' << f(report.random.percentile) << ','
     << f(report.random.percentile_ci.low) << ',' << f(report.random.percentile_ci.high) << ','
     << f(report.level) << ',' << report.random.n << '\n';
  out.add("vs_random.csv", random_csv.str());

  std::ostringstream tests;
  tests << "test,population,statistic,p_value,df,effect_size\n";
  const auto test_row = [&](const std::string& name, const std::string& pop, const TestResult& r) {
    tests << name << ',' << pop << ',' << f(r.statistic) << ',' << f(r.p_value) << ','
          << opt_double(r.df) << ',' << opt_double(r.effect_size) << '\n';
  };
  test_row("ks_normality", "random", report.random.ks);

  std::ostringstream box;
  box << "population,n,min,whisker_low,q1,median,q3,whisker_high,max,mean,outliers,generated_fpts\n";
  const auto box_row = [&](const PopulationSummary& s) {
    const auto& b = s.box;
    box << to_string(s.label) << ',' << b.n << ',' << f(b.min) << ',' << f(b.whisker_low) << ','
        << f(b.q1) << ',' << f(b.median) << ',' << f(b.q3) << ',' << f(b.whisker_high) << ','
        << f(b.max) << ',' << f(b.mean) << ',' << b.outliers << ',' << f(score) << '\n';
  };
  box_row(report.random);

  if (report.real) {
    const auto& r = *report.real;
    std::ostringstream users_csv;
    users_csv << "week,fpts,users_mean_fpts,users_low,users_high,percentile,ci_low,ci_high,level,users,"
          "zeros_removed\n";
    users_csv << week << ',' << f(score) << ',' << f(r.mean) << ',' << f(r.range_low) << ','
       << f(r.range_high) << ',' << f(r.percentile) << ',' << f(r.percentile_ci.low) << ','
       << f(r.percentile_ci.high) << ',' << f(report.level) << ',' << r.n << ','
       << r.zeros_removed << '\n';
    out.add("vs_users.csv", users_csv.str());
    test_row("ks_normality", "real_world", r.ks);
    test_row("welch_t", "real_world_vs_random", *report.welch);
    box_row(r);
  }
  out.add("tests.csv", tests.str());
  out.add("boxplot.csv", box.str());

  std::ostringstream pop_csv;
  pop_csv << "lineup,fpts\n";
  for (std::size_t i = 0; i < random_pop.samples.size(); ++i) {
    pop_csv << i << ',' << f(random_pop.samples[i]) << '\n';
  }
  out.add("random_population.csv", pop_csv.str());
  return out;
}

ArtifactSet run_report(const RunConfig& config) {
  const auto section = [&](const char* title, const char* file, bool required) -> std::string {
    const auto path = config.output_dir / file;
    if (!std::filesystem::exists(path)) {
      if (required) throw InputError("missing artifact '" + path.string() + "'; run validate first");
      return {};
    }
    return std::string(title) + "\n" + format_table(text::read_file(path)) + "\n";
  };
  std::string body = "Week " + std::to_string(config.target_week) + " lineup report\n\n";
  body += section("Generated lineup", "lineup.csv", true);
  body += section("Predicted vs actual", "lineup_result.csv", true);
  body += section("Against random lineups", "vs_random.csv", false);
  body += section("Against contest users", "vs_users.csv", false);
  body += section("Hypothesis tests", "tests.csv", false);
  body += section("Boxplot data", "boxplot.csv", false);
  ArtifactSet out;
  out.add("report.txt", body);
  return out;
}

void cmd_ingest(const RunConfig& config) { run_ingest(config).commit(config.output_dir); }
void cmd_predict(const RunConfig& config) { run_predict(config).commit(config.output_dir); }
void cmd_optimize(const RunConfig& config) { run_optimize(config).commit(config.output_dir); }
void cmd_validate(const RunConfig& config) { run_validate(config).commit(config.output_dir); }

std::string cmd_report(const RunConfig& config) {
  ArtifactSet set = run_report(config);
  set.commit(config.output_dir);
  return set.files().at("report.txt");
}

}  // namespace dfs
