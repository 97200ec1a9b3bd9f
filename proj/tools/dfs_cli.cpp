// Command-line front end for the lineup pipeline.
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dfs/error.hpp"
#include "dfs/pipeline.hpp"

namespace {

int report_error(const std::string& command, const std::string& kind, int code,
                 const std::string& message) {
  nlohmann::json err = {{"error", kind}, {"command", command}, {"exit_code", code},
                        {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

std::string kind_name(dfs::ErrorKind kind) {
  switch (kind) {
    case dfs::ErrorKind::kInput: return "input";
    case dfs::ErrorKind::kInfeasible: return "infeasible";
    case dfs::ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fantasy football lineup forecasting and validation"};
  app.require_subcommand(1);

  std::string config_path = "config.json";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_models;
  std::optional<std::size_t> workers;
  bool verbose = false;

  app.add_option("-c,--config", config_path, "Run configuration (JSON)");
  app.add_option("-o,--out", out_dir, "Override the output directory");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--n-models", n_models, "Override the ensemble size")->check(CLI::PositiveNumber);
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  auto* ingest = app.add_subcommand("ingest", "Build the training and prediction windows");
  auto* predict = app.add_subcommand("predict", "Train the ensemble and export predictions");
  auto* optimize = app.add_subcommand("optimize", "Solve per-model lineups and pick the modal one");
  auto* validate = app.add_subcommand("validate", "Compare the lineup to random and contest lineups");
  auto* report = app.add_subcommand("report", "Print a summary of the validation artifacts");
  auto* config_init = app.add_subcommand("config-init", "Print a configuration with every default");
  for (auto* sub : {ingest, predict, optimize, validate, report, config_init}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(dfs::ErrorKind::kInput);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "config-init") {
      dfs::RunConfig defaults;
      if (!out_dir.empty()) defaults.output_dir = out_dir;
      std::cout << dfs::config_to_json(defaults);
      return 0;
    }

    dfs::RunConfig config = dfs::load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed) config.master_seed = *seed;
    if (n_models) config.n_models = *n_models;
    if (workers) config.workers = *workers;
    config.verbose = verbose;
    config.validate();

    if (command == "ingest") dfs::cmd_ingest(config);
    else if (command == "predict") dfs::cmd_predict(config);
    else if (command == "optimize") dfs::cmd_optimize(config);
    else if (command == "validate") dfs::cmd_validate(config);
    else if (command == "report") std::cout << dfs::cmd_report(config);
    return 0;
  } catch (const dfs::Error& e) {
    return report_error(command, kind_name(e.kind()), e.exit_code(), e.what());
  } catch (const std::exception& e) {
    return report_error(command, "internal", 1, e.what());
  }
}
