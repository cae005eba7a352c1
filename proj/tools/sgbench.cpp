#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/pipeline/run.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sgbench;
using namespace sgbench::pipeline;

struct Args {
  std::string config;
  std::string out;
  std::vector<std::string> filters;
  std::size_t jobs = 1;
  bool force = false;
  std::optional<std::uint64_t> seed_offset;
  std::string log_level = "info";
};

StageOptions stage_options(const Args& a) {
  StageOptions o;
  o.force = a.force;
  o.jobs = a.jobs;
  for (const auto& f : a.filters) o.filters.push_back(Filter::parse(f));
  return o;
}

ExperimentConfig resolve_config(const Args& a) {
  auto config = a.config.empty() ? ExperimentConfig::defaults() : load_config(a.config);
  if (a.seed_offset) config.seed_offset = *a.seed_offset;
  config.validate();
  return config;
}

// Stages after generate read the persisted config; an explicit --config must agree with it.
void check_config_matches(const Args& a) {
  if (a.config.empty()) return;
  const auto given = resolve_config(a);
  const auto stored = load_config(fs::path(a.out) / kConfigFile);
  require(config_hash(given) == config_hash(stored), ErrorKind::Config,
          "--config differs from the config stored in " + a.out);
}

int report_outcome(const char* stage, const StageOutcome& o) {
  std::printf("%s: %zu ok, %zu failed, %zu skipped\n", stage, o.ok, o.failed, o.skipped);
  return o.success() ? 0 : 1;
}

log::Level parse_level(const std::string& s) {
  if (s == "debug") return log::Level::Debug;
  if (s == "info") return log::Level::Info;
  if (s == "warn") return log::Level::Warn;
  if (s == "error") return log::Level::Error;
  if (s == "off") return log::Level::Off;
  fail(ErrorKind::Config, "unknown log level: " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train time-conditioned neural simulators on 1D heat and Burgers dynamics and "
               "evaluate their semigroup consistency"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Args args;
  app.add_option("--log-level", args.log_level, "debug, info, warn, error or off")->capture_default_str();

  auto* init = app.add_subcommand("init-config", "Write the default experiment config");
  init->add_option("--out", args.out, "Config file to write")->required();
  init->add_option("--seed-offset", args.seed_offset, "First seed index");
  init->add_flag("--force", args.force, "Overwrite an existing file");

  auto* generate = app.add_subcommand("generate", "Create a run directory and generate all datasets");
  generate->add_option("--config", args.config, "Experiment config (defaults if omitted)");
  generate->add_option("--out", args.out, "Run directory")->required();
  generate->add_option("--seed-offset", args.seed_offset, "Override the config's first seed index");
  generate->add_option("--jobs", args.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
  generate->add_flag("--force", args.force, "Overwrite an existing run");

  auto add_grid_options = [&](CLI::App* cmd) {
    cmd->add_option("--out", args.out, "Run directory")->required();
    cmd->add_option("--config", args.config, "Must match the run's stored config if given");
    cmd->add_option("--seed-offset", args.seed_offset, "Seed offset of --config");
    cmd->add_option("--filter", args.filters, "key=value on system, family, variant, seed, regime")
        ->expected(1, -1);
    cmd->add_option("--jobs", args.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
    cmd->add_flag("--force", args.force, "Redo jobs that already have valid outputs");
  };
  auto* train = app.add_subcommand("train", "Train the model grid");
  add_grid_options(train);
  auto* evaluate = app.add_subcommand("evaluate", "Compute diagnostic records for trained models");
  add_grid_options(evaluate);
  auto* analyze = app.add_subcommand("analyze", "Aggregate records into summary statistics");
  analyze->add_option("--out", args.out, "Run directory")->required();
  auto* report = app.add_subcommand("report", "Render the markdown report");
  report->add_option("--out", args.out, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    log::set_level(parse_level(args.log_level));
    if (init->parsed()) {
      require(args.force || !fs::exists(args.out), ErrorKind::Config,
              args.out + " exists; pass --force to overwrite");
      auto config = ExperimentConfig::defaults();
      if (args.seed_offset) config.seed_offset = *args.seed_offset;
      save_config(args.out, config);
      std::printf("wrote %s (config hash %s)\n", args.out.c_str(), config_hash(config).c_str());
      return 0;
    }
    if (generate->parsed()) {
      return report_outcome("generate", run_generate(resolve_config(args), args.out, stage_options(args)));
    }
    if (train->parsed()) {
      check_config_matches(args);
      return report_outcome("train", run_train(args.out, stage_options(args)));
    }
    if (evaluate->parsed()) {
      check_config_matches(args);
      return report_outcome("evaluate", run_evaluate(args.out, stage_options(args)));
    }
    if (analyze->parsed()) return report_outcome("analyze", run_analyze(args.out, stage_options(args)));
    if (report->parsed()) return report_outcome("report", run_report(args.out, stage_options(args)));
  } catch (const Error& e) {
    std::cerr << "sgbench: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sgbench: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
