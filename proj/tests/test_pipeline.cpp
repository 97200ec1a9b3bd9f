#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dfs/error.hpp"
#include "dfs/pipeline.hpp"
#include "dfs/rng.hpp"
#include "dfs/text_io.hpp"
#include "oracles.hpp"
#include "test_paths.hpp"

using namespace dfs;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// A reduced run on the bundled fixture that finishes in a few seconds.
json small_config(const fs::path& out_dir) {
  const auto fx = test_paths::fixture();
  return json{
      {"paths",
       {{"players", (fx / "players.csv").string()},
        {"exclusions", (fx / "exclusions.txt").string()},
        {"contest_results", (fx / "contest_results.csv").string()},
        {"output_dir", out_dir.string()}}},
      {"season", {{"target_week", 6}}},
      {"ensemble", {{"n_models", 20}, {"master_seed", 2018}, {"workers", 1}}},
      {"baseline", {{"count", 3000}}},
      {"report", {{"bootstrap_resamples", 500}}},
  };
}

RunConfig config_from(const json& j) { return parse_config(j.dump()); }

void run_all(const RunConfig& c) {
  cmd_ingest(c);
  cmd_predict(c);
  cmd_optimize(c);
  cmd_validate(c);
  cmd_report(c);
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = "\"" + test_paths::cli().string() + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

fs::path write_config_file(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  spit(p, j.dump(2));
  return p;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

// One shared reduced run, reused by the read-only checks below.
const fs::path& shared_run() {
  static const fs::path dir = [] {
    const auto d = test_paths::scratch("pipeline_shared");
    run_all(config_from(small_config(d / "out")));
    return d / "out";
  }();
  return dir;
}

}  // namespace

TEST(Config, DefaultsFromEmptyObject) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.target_week, 6);
  EXPECT_EQ(c.n_models, 200u);
  EXPECT_EQ(c.master_seed, 2018u);
  EXPECT_EQ(c.rules.salary_cap, 50000);
  EXPECT_FALSE(c.rules.require_two_teams);
  EXPECT_EQ(c.random_count, 35000u);
  EXPECT_EQ(c.min_salary, 45000);
  EXPECT_FALSE(c.random_flex.has_value());
  EXPECT_EQ(c.bootstrap_resamples, 10000u);
  EXPECT_EQ(c.interval_level, 0.95);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(R"({"ensemble": {"n_model": 3}})"), InputError);
  EXPECT_THROW(parse_config(R"({"extras": {}})"), InputError);
  EXPECT_THROW(parse_config("not json"), InputError);
  EXPECT_THROW(parse_config(R"({"ensemble": {"n_models": "many"}})"), InputError);
}

TEST(Config, RangeChecks) {
  EXPECT_THROW(parse_config(R"({"season": {"target_week": 4}})"), InputError);
  EXPECT_THROW(parse_config(R"({"season": {"target_week": 18}})"), InputError);
  EXPECT_THROW(parse_config(R"({"ensemble": {"n_models": 0}})"), InputError);
  EXPECT_THROW(parse_config(R"({"ensemble": {"interval_level": 1.0}})"), InputError);
  EXPECT_THROW(parse_config(R"({"baseline": {"flex": "1/4/2"}})"), InputError);
  EXPECT_THROW(parse_config(R"({"training": {"train_fraction": 0}})"), InputError);
  EXPECT_NO_THROW(parse_config(R"({"season": {"target_week": 5}})"));
  EXPECT_NO_THROW(parse_config(R"({"season": {"target_week": 17}})"));
  // A zero cap is a valid config; the optimizer reports it as infeasible.
  EXPECT_NO_THROW(parse_config(R"({"rules": {"salary_cap": 0}})"));
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
  const auto c = parse_config(R"({"paths": {"players": "p.csv", "output_dir": "o"}})", "/data/season");
  EXPECT_EQ(c.players_csv, fs::path("/data/season/p.csv"));
  EXPECT_EQ(c.output_dir, fs::path("/data/season/o"));
  EXPECT_TRUE(c.exclusions.empty());
  const auto abs = parse_config(R"({"paths": {"players": "/x/p.csv"}})", "/data");
  EXPECT_EQ(abs.players_csv, fs::path("/x/p.csv"));
}

TEST(Config, JsonRoundTrip) {
  auto j = small_config("/tmp/o");
  j["baseline"]["flex"] = "2/4/1";
  j["rules"] = {{"salary_cap", 60000}, {"require_two_teams", true}};
  const auto c = config_from(j);
  const auto back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.random_flex, kFlexConfigs[1]);
  EXPECT_TRUE(back.rules.require_two_teams);
  EXPECT_EQ(back.n_models, 20u);
}

TEST(Seeds, StreamsAreDistinctFromModelSeeds) {
  const auto a = stream_seed(2018, SeedStream::kRandomBaseline);
  const auto b = stream_seed(2018, SeedStream::kBootstrap);
  EXPECT_NE(a, b);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    EXPECT_NE(derive_seed(2018, i), a);
    EXPECT_NE(derive_seed(2018, i), b);
  }
}

TEST(Windows, TargetWeekMapping) {
  EXPECT_EQ(training_window_for(5), 1);
  EXPECT_EQ(prediction_window_for(5), 2);
  EXPECT_EQ(training_window_for(17), 13);
  EXPECT_EQ(prediction_window_for(17), 14);
}

TEST(Artifacts, CommitWritesAllFiles) {
  const auto dir = test_paths::scratch("artifacts_ok");
  ArtifactSet a;
  a.add("one.txt", "1\n");
  a.add("two.txt", "2\n");
  a.commit(dir / "nested");
  EXPECT_EQ(listing(dir / "nested"), (std::vector<std::string>{"one.txt", "two.txt"}));
  EXPECT_EQ(slurp(dir / "nested" / "two.txt"), "2\n");
}

TEST(Artifacts, FailedCommitLeavesNothing) {
  const auto dir = test_paths::scratch("artifacts_fail");
  fs::create_directories(dir / "out" / "b.txt");  // a directory where a file must go
  ArtifactSet a;
  a.add("a.txt", "a");
  a.add("b.txt", "b");
  a.add("c.txt", "c");
  EXPECT_ANY_THROW(a.commit(dir / "out"));
  EXPECT_EQ(listing(dir / "out"), std::vector<std::string>{"b.txt"});
}

TEST(Artifacts, FailedCommitRestoresPreviousOutputs) {
  const auto dir = test_paths::scratch("artifacts_restore");
  fs::create_directories(dir / "out" / "b.txt");
  spit(dir / "out" / "a.txt", "old a");
  ArtifactSet a;
  a.add("a.txt", "new a");
  a.add("b.txt", "b");
  EXPECT_ANY_THROW(a.commit(dir / "out"));
  EXPECT_EQ(listing(dir / "out"), (std::vector<std::string>{"a.txt", "b.txt"}));
  EXPECT_EQ(slurp(dir / "out" / "a.txt"), "old a");
  ArtifactSet ok;
  ok.add("a.txt", "newer a");
  ok.commit(dir / "out");
  EXPECT_EQ(slurp(dir / "out" / "a.txt"), "newer a");
  EXPECT_EQ(listing(dir / "out"), (std::vector<std::string>{"a.txt", "b.txt"}));
}

TEST(DatasetCsv, RoundTrip) {
  const auto text = slurp(shared_run() / "train_window.csv");
  const auto ds = read_dataset_csv(text, "train_window.csv");
  EXPECT_TRUE(ds.has_targets);
  EXPECT_EQ(ds.window_index, 2);
  EXPECT_EQ(write_dataset_csv(ds), text);
  EXPECT_THROW(read_dataset_csv("player_id,position\n", "x"), ParseError);
}

TEST(Histogram, BinsAlignToWidth) {
  const std::vector<double> s = {10.1, 10.9, 11.99, 12.0, 15.5};
  const auto h = histogram(s, 2.0);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0].low, 10.0);
  EXPECT_EQ(h[0].count, 3u);
  EXPECT_EQ(h[1].low, 12.0);
  EXPECT_EQ(h[1].count, 1u);
  EXPECT_EQ(h[2].high, 16.0);
  EXPECT_EQ(h[2].count, 1u);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_EQ(total, s.size());
}

TEST(Pipeline, ExclusionAppliedOnlyToPredictionWindow) {
  const auto elig = slurp(shared_run() / "eligibility.csv");
  EXPECT_NE(elig.find("WR007,3,predict,excluded,"), std::string::npos);
  const auto predict = slurp(shared_run() / "predict_window.csv");
  EXPECT_EQ(predict.find("\nWR007,"), std::string::npos);
  const auto preds = slurp(shared_run() / "predictions.csv");
  EXPECT_EQ(preds.find("\nWR007,"), std::string::npos);
}

TEST(Pipeline, LineupIsValidAgainstPredictions) {
  const auto rows = read_predictions_csv(slurp(shared_run() / "predictions.csv"), "predictions");
  std::vector<Candidate> pool;
  for (const auto& r : rows) {
    if (r.salary <= 0) continue;
    Candidate c;
    c.player_id = r.player_id;
    c.position = r.position;
    c.salary = r.salary;
    c.predicted_fpts = r.mean_fpts;
    pool.push_back(c);
  }
  const auto lineup = read_lineup_csv(slurp(shared_run() / "lineup.csv"));
  EXPECT_EQ(oracle::lineup_violation(lineup, pool, kDefaultSalaryCap), "");
}

TEST(Pipeline, ValidateOutputsCarryExpectedColumns) {
  const auto& d = shared_run();
  const auto header = [&](const char* name) {
    const auto t = slurp(d / name);
    return t.substr(0, t.find('\n'));
  };
  EXPECT_EQ(header("lineup_result.csv"),
            "week,status,predicted_fpts,ci_low,ci_high,level,actual_fpts,flex_config,total_salary,"
            "missing_players");
  EXPECT_EQ(header("vs_random.csv"), "week,fpts,percentile,ci_low,ci_high,level,random_lineups");
  EXPECT_EQ(header("vs_users.csv"),
            "week,fpts,users_mean_fpts,users_low,users_high,percentile,ci_low,ci_high,level,users,"
            "zeros_removed");
  EXPECT_EQ(header("histograms.csv"), "player_id,slot,bin_low,bin_high,count,actual_fpts");
  EXPECT_EQ(header("tests.csv"), "test,population,statistic,p_value,df,effect_size");
  EXPECT_NE(slurp(d / "lineup_result.csv").find("\n6,valid,"), std::string::npos);
  EXPECT_NE(slurp(d / "vs_random.csv").find(",3000\n"), std::string::npos);
}

TEST(Pipeline, HistogramCountsEqualModelCount) {
  const auto t = slurp(shared_run() / "histograms.csv");
  std::map<std::string, std::size_t> per_player;
  for (const auto line : text::lines(t)) {
    if (line.empty() || line.starts_with("player_id")) continue;
    const auto f = text::split(line);
    ASSERT_EQ(f.size(), 6u);
    per_player[std::string(f[0])] += static_cast<std::size_t>(*text::parse_int(f[4]));
    const double lo = *text::parse_double(f[2]);
    EXPECT_EQ(std::fmod(lo, 2.0), 0.0);
  }
  EXPECT_EQ(per_player.size(), 9u);
  for (const auto& [id, n] : per_player) EXPECT_EQ(n, 20u) << id;
}

TEST(Pipeline, ScoreAgreesWithSeasonFile) {
  const auto table = load_player_weeks(test_paths::fixture() / "players.csv");
  const auto lineup = read_lineup_csv(slurp(shared_run() / "lineup.csv"));
  double total = 0;
  for (const auto& s : lineup.slots) total += *table.find(s.player_id, 6)->fpts;
  ASSERT_TRUE(lineup.actual_fpts.has_value());
  EXPECT_NEAR(*lineup.actual_fpts, total, 1e-9);
  const auto result = slurp(shared_run() / "lineup_result.csv");
  EXPECT_NE(result.find("," + text::format_double(*lineup.actual_fpts) + ","), std::string::npos);
}

TEST(Pipeline, SingleModelMatchesDirectTraining) {
  const auto dir = test_paths::scratch("single_model");
  auto j = small_config(dir / "out");
  j["ensemble"]["n_models"] = 1;
  const auto c = config_from(j);
  cmd_ingest(c);
  cmd_predict(c);
  const auto train_ds = read_dataset_csv(slurp(dir / "out" / "train_window.csv"), "train");
  const auto predict_ds = read_dataset_csv(slurp(dir / "out" / "predict_window.csv"), "predict");
  const auto model = train(make_batch(train_ds), c.training, derive_seed(c.master_seed, 0));
  const auto rows = read_predictions_csv(slurp(dir / "out" / "predictions.csv"), "predictions");
  ASSERT_EQ(rows.size(), predict_ds.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].player_id, predict_ds.rows[i].player_id);
    EXPECT_EQ(rows[i].mean_fpts, model.predict(predict_ds.rows[i].features.values));
    EXPECT_EQ(rows[i].ci_low, rows[i].mean_fpts);
    EXPECT_EQ(rows[i].ci_high, rows[i].mean_fpts);
  }
}

TEST(Pipeline, RerunsAreByteIdenticalAcrossWorkerCounts) {
  const auto dir = test_paths::scratch("rerun");
  auto j = small_config(dir / "b");
  j["ensemble"]["workers"] = 3;
  run_all(config_from(j));
  const auto names = listing(shared_run());
  EXPECT_EQ(listing(dir / "b"), names);
  for (const auto& n : names) {
    EXPECT_EQ(slurp(dir / "b" / n), slurp(shared_run() / n)) << n;
  }
}

TEST(Pipeline, MissingActualMarksWeekInvalid) {
  const auto dir = test_paths::scratch("invalid_week");
  for (const auto& n : listing(shared_run())) fs::copy_file(shared_run() / n, dir / n);
  const auto lineup = read_lineup_csv(slurp(dir / "lineup.csv"));
  const std::string victim = lineup.slots[3].player_id;

  // Blank the victim's week-6 points in a copy of the season file.
  const std::string original = slurp(test_paths::fixture() / "players.csv");
  std::ostringstream edited;
  for (const auto line : text::lines(original)) {
    if (line.empty()) continue;
    std::string row(line);
    if (row.starts_with(victim + ",6,")) {
      auto f = text::split(row);
      std::string rebuilt;
      for (std::size_t i = 0; i < f.size(); ++i) {
        rebuilt += (i ? "," : "") + (i == 4 ? std::string() : std::string(f[i]));
      }
      row = rebuilt;
    }
    edited << row << '\n';
  }
  spit(dir / "players.csv", edited.str());

  auto j = small_config(dir);
  j["paths"]["players"] = (dir / "players.csv").string();
  fs::remove(dir / "vs_random.csv");
  fs::remove(dir / "vs_users.csv");
  cmd_validate(config_from(j));
  const auto result = slurp(dir / "lineup_result.csv");
  EXPECT_NE(result.find("\n6,invalid_week,"), std::string::npos) << result;
  EXPECT_NE(result.find(victim), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "vs_random.csv"));
  EXPECT_FALSE(fs::exists(dir / "vs_users.csv"));
}

TEST(Pipeline, ReportMentionsEveryTable) {
  const auto report = slurp(shared_run() / "report.txt");
  for (const char* title : {"Generated lineup", "Predicted vs actual", "Against random lineups",
                            "Against contest users", "Hypothesis tests", "Boxplot data"}) {
    EXPECT_NE(report.find(title), std::string::npos) << title;
  }
}

TEST(Golden, ReducedRunMatchesCommittedFiles) {
  const auto golden = test_paths::golden();
  const std::vector<std::string> files = {"train_window.csv", "predict_window.csv",
                                          "eligibility.csv",  "predictions.csv",
                                          "lineup.csv",       "lineup_summary.csv",
                                          "lineup_result.csv",       "vs_random.csv",
                                          "vs_users.csv",       "report.txt"};
  if (std::getenv("DFS_UPDATE_GOLDEN")) {
    fs::create_directories(golden);
    for (const auto& f : files) fs::copy_file(shared_run() / f, golden / f, fs::copy_options::overwrite_existing);
    GTEST_SKIP() << "golden files rewritten";
  }
  for (const auto& f : files) {
    ASSERT_TRUE(fs::exists(golden / f)) << f;
    EXPECT_EQ(slurp(shared_run() / f), slurp(golden / f)) << f;
  }
}

TEST(Cli, MissingSeasonFileExitsTwo) {
  const auto dir = test_paths::scratch("cli_missing");
  auto j = small_config(dir / "out");
  j["paths"]["players"] = (dir / "nope.csv").string();
  const auto cfg = write_config_file(dir, j);
  const auto r = run_cli("ingest -c \"" + cfg.string() + "\"", dir);
  EXPECT_EQ(r.exit_code, 2);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err.at("exit_code"), 2);
  EXPECT_EQ(err.at("command"), "ingest");
  EXPECT_EQ(err.at("error"), "input");
  EXPECT_NE(err.at("message").get<std::string>().find("nope.csv"), std::string::npos);
  EXPECT_TRUE(listing(dir / "out").empty());
}

TEST(Cli, ZeroCapExitsThreeWithoutArtifacts) {
  const auto dir = test_paths::scratch("cli_cap");
  for (const auto& n : {"train_window.csv", "predict_window.csv", "eligibility.csv",
                        "predictions.csv", "samples.csv", "ensemble.txt"}) {
    fs::create_directories(dir / "out");
    fs::copy_file(shared_run() / n, dir / "out" / n);
  }
  auto j = small_config(dir / "out");
  j["rules"] = {{"salary_cap", 0}};
  const auto cfg = write_config_file(dir, j);
  const auto r = run_cli("optimize -c \"" + cfg.string() + "\"", dir);
  EXPECT_EQ(r.exit_code, 3);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err.at("error"), "infeasible");
  EXPECT_EQ(err.at("exit_code"), 3);
  EXPECT_FALSE(fs::exists(dir / "out" / "lineup.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "lineup_summary.csv"));
}

TEST(Cli, BadArgumentsExitTwo) {
  const auto dir = test_paths::scratch("cli_args");
  EXPECT_EQ(run_cli("frobnicate", dir).exit_code, 2);
  EXPECT_EQ(run_cli("predict --n-models notanumber", dir).exit_code, 2);
}

TEST(Cli, ConfigInitPrintsParseableDefaults) {
  const auto dir = test_paths::scratch("cli_init");
  const auto r = run_cli("config-init", dir);
  EXPECT_EQ(r.exit_code, 0);
  const auto c = parse_config(r.out);
  EXPECT_EQ(c.n_models, 200u);
}

TEST(Cli, OverridesAndFullRun) {
  const auto dir = test_paths::scratch("cli_run");
  const auto cfg = write_config_file(dir, small_config(dir / "ignored"));
  const std::string common = " -c \"" + cfg.string() + "\" -o \"" + (dir / "out").string() + "\"";
  for (const char* sub : {"ingest", "predict", "optimize", "validate", "report"}) {
    const auto r = run_cli(std::string(sub) + common + " --workers 2", dir);
    ASSERT_EQ(r.exit_code, 0) << sub << ": " << r.err;
  }
  EXPECT_FALSE(fs::exists(dir / "ignored"));
  for (const auto& n : listing(shared_run())) {
    EXPECT_EQ(slurp(dir / "out" / n), slurp(shared_run() / n)) << n;
  }
  const auto seeded = run_cli("predict" + common + " --seed 7 --n-models 3", dir);
  ASSERT_EQ(seeded.exit_code, 0) << seeded.err;
  EXPECT_NE(slurp(dir / "out" / "predictions.csv"), slurp(shared_run() / "predictions.csv"));
}
