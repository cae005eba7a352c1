#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgbench/pipeline/config.hpp"
#include "sgbench/pipeline/manifest.hpp"
#include "sgbench/pipeline/records.hpp"

namespace sgbench::pipeline {

/// Where each stage reads and writes inside a run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / kConfigFile; }
  std::filesystem::path data_dir() const { return root / "data"; }
  std::filesystem::path models_dir() const { return root / "models"; }
  std::filesystem::path records_dir() const { return root / "records"; }
  std::filesystem::path analysis_dir() const { return root / "analysis"; }
  std::filesystem::path figures_dir() const { return analysis_dir() / "figures"; }
  std::filesystem::path report() const { return root / "report.md"; }

  /// `<system>_<regime>`; the split suffix is added by the dataset writer.
  static std::string dataset_name(solver::PdeKind system, solver::Regime regime);
  std::filesystem::path dataset(solver::PdeKind system, solver::Regime regime,
                                solver::Split split) const;
  std::filesystem::path checkpoint_base(const std::string& job_id) const;
  std::filesystem::path train_report(const std::string& job_id) const;
  std::filesystem::path loss_csv(const std::string& job_id) const;
  std::filesystem::path records_csv(const std::string& run_id) const;
  std::filesystem::path records_json(const std::string& run_id) const;
};

/// `key=value` restriction on grid axes: system, family, variant, seed, regime.
struct Filter {
  std::string key;
  std::string value;

  static Filter parse(const std::string& text);
};

bool matches(const std::vector<Filter>& filters, const RunKey& key);

struct StageOptions {
  bool force = false;
  std::size_t jobs = 1;
  std::vector<Filter> filters;
};

struct StageOutcome {
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;

  bool success() const { return failed == 0; }
};

/// One trained model of the grid; regime is empty.
std::vector<RunKey> training_grid(const ExperimentConfig& config);

/// Runs task(i) for i in [0, n) on up to `jobs` threads.
void run_parallel(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task);

/// Loads the persisted config and manifest of an existing run and checks they agree.
struct OpenRun {
  RunLayout layout;
  ExperimentConfig config;
  RunManifest manifest;
};
OpenRun open_run(const std::filesystem::path& run_dir);

/// True if the manifest holds an ok entry for id whose artifacts all pass their checks.
bool job_is_current(const RunLayout& layout, const RunManifest& manifest, const std::string& id);

std::string tool_version();

// Stages. Each one records its jobs in the manifest and finalizes it.

/// Writes config.json and every (system, regime) dataset. Refuses a run
/// directory that already holds data unless options.force is set.
StageOutcome run_generate(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                          const StageOptions& options);
StageOutcome run_train(const std::filesystem::path& run_dir, const StageOptions& options);
StageOutcome run_evaluate(const std::filesystem::path& run_dir, const StageOptions& options);
StageOutcome run_analyze(const std::filesystem::path& run_dir, const StageOptions& options);
StageOutcome run_report(const std::filesystem::path& run_dir, const StageOptions& options);

}  // namespace sgbench::pipeline
