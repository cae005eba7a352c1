#include <map>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/models/checkpoint.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/run.hpp"

namespace sgbench::pipeline {
namespace {

struct SystemData {
  solver::Dataset train;
  solver::Dataset val;
};

// Saves under a temporary name and renames both files once complete.
models::CheckpointPaths save_checkpoint_atomic(const models::SimulatorModel& model,
                                               const RunLayout& layout, const std::string& job_id) {
  const auto final_paths = models::checkpoint_paths(layout.checkpoint_base(job_id));
  const auto tmp_paths = models::save_checkpoint(model, layout.models_dir() / (".partial-" + job_id));
  std::filesystem::rename(tmp_paths.blob, final_paths.blob);
  std::filesystem::rename(tmp_paths.manifest, final_paths.manifest);
  return final_paths;
}

}  // namespace

StageOutcome run_train(const std::filesystem::path& run_dir, const StageOptions& options) {
  auto run = open_run(run_dir);
  const auto& config = run.config;
  const auto& layout = run.layout;
  std::filesystem::create_directories(layout.models_dir());

  std::vector<RunKey> jobs;
  for (const auto& key : training_grid(config)) {
    if (matches(options.filters, key)) jobs.push_back(key);
  }

  std::map<std::string, SystemData> data;
  for (const auto& key : jobs) {
    if (data.contains(key.system)) continue;
    const auto kind = solver::parse_pde_kind(key.system);
    data[key.system] = {
        solver::load_dataset(layout.dataset(kind, solver::Regime::InDistribution, solver::Split::Train)),
        solver::load_dataset(layout.dataset(kind, solver::Regime::InDistribution, solver::Split::Val))};
  }

  ManifestWriter writer(run_dir, run.manifest);
  StageOutcome outcome;
  std::mutex outcome_mutex;
  log::info("train: " + std::to_string(jobs.size()) + " jobs");

  run_parallel(jobs.size(), options.jobs, [&](std::size_t i) {
    const auto& key = jobs[i];
    const std::string job_id = key.job_id();
    const std::string entry_id = "train:" + job_id;
    if (!options.force && job_is_current(layout, run.manifest, entry_id)) {
      log::info("train " + job_id + ": valid checkpoint present, skipping");
      std::lock_guard lock(outcome_mutex);
      ++outcome.skipped;
      return;
    }

    JobEntry job;
    job.id = entry_id;
    job.stage = "train";
    job.started = utc_timestamp();
    try {
      const auto& sd = data.at(key.system);
      models::SimulatorModel model(config.model_config(models::parse_family(key.family), key.seed));
      auto result = training::train(std::move(model), sd.train, sd.val,
                                    config.train_config(config.variant(key.variant), key.seed));
      auto& report = result.report;
      if (!report.failed) {
        const auto paths = save_checkpoint_atomic(result.model, layout, job_id);
        report.checkpoint_path = std::filesystem::relative(paths.manifest, run_dir).generic_string();
        job.artifacts.push_back(make_artifact(run_dir, paths.manifest, ArtifactFormat::Checkpoint));
        job.artifacts.push_back(make_artifact(run_dir, paths.blob, ArtifactFormat::Checkpoint));
      }
      write_text_atomic(layout.train_report(job_id), training::to_json(report).dump(2) + "\n");
      training::write_loss_csv(layout.loss_csv(job_id), report);
      job.artifacts.push_back(make_artifact(run_dir, layout.train_report(job_id), ArtifactFormat::Json));
      job.artifacts.push_back(make_artifact(run_dir, layout.loss_csv(job_id), ArtifactFormat::Csv));
      job.details = {{"best_epoch", report.best_epoch},
                     {"best_val_pred", report.best_val_pred},
                     {"steps", report.steps},
                     {"skipped_steps", report.skipped_steps},
                     {"wall_seconds", report.wall_seconds}};
      job.status = report.failed ? JobStatus::Failed : JobStatus::Ok;
      job.message = report.failure_reason;
      log::info("train " + job_id + ": " + (report.failed ? "failed, " + report.failure_reason
                                                          : "best val " + std::to_string(report.best_val_pred)));
    } catch (const std::exception& e) {
      job.status = JobStatus::Failed;
      job.message = e.what();
      log::error("train " + job_id + " failed: " + e.what());
    }
    job.finished = utc_timestamp();
    {
      std::lock_guard lock(outcome_mutex);
      job.status == JobStatus::Ok ? ++outcome.ok : ++outcome.failed;
    }
    writer.record(std::move(job));
  });
  writer.finalize();
  return outcome;
}

}  // namespace sgbench::pipeline
