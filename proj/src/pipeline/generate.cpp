#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/run.hpp"

namespace sgbench::pipeline {
namespace {

bool non_empty_dir(const std::filesystem::path& p) {
  return std::filesystem::is_directory(p) && !std::filesystem::is_empty(p);
}

}  // namespace

StageOutcome run_generate(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                          const StageOptions& options) {
  config.validate();
  const RunLayout layout{run_dir};
  if (!options.force) {
    require(!non_empty_dir(layout.data_dir()) && !std::filesystem::exists(layout.config()),
            ErrorKind::Config, run_dir.string() + " already holds a run; pass --force to overwrite");
  } else {
    for (const auto& p : {layout.data_dir(), layout.models_dir(), layout.records_dir(),
                          layout.analysis_dir(), layout.report(), run_dir / kManifestFile}) {
      std::filesystem::remove_all(p);
    }
  }
  std::filesystem::create_directories(layout.data_dir());

  RunManifest manifest;
  manifest.run_id = run_id(config);
  manifest.config_hash = config_hash(config);
  manifest.tool_version = tool_version();
  manifest.started = utc_timestamp();
  ManifestWriter writer(run_dir, manifest);

  save_config(layout.config(), config);
  JobEntry config_job;
  config_job.id = "config";
  config_job.stage = "generate";
  config_job.started = config_job.finished = utc_timestamp();
  config_job.artifacts.push_back(make_artifact(run_dir, layout.config(), ArtifactFormat::Config));
  config_job.details = {{"config_hash", manifest.config_hash}};
  writer.record(config_job);

  struct Task {
    SystemSpec system;
    solver::Regime regime;
  };
  std::vector<Task> tasks;
  for (const auto& s : config.systems) {
    for (auto r : config.regimes) tasks.push_back({s, r});
  }

  StageOutcome outcome;
  std::mutex outcome_mutex;
  run_parallel(tasks.size(), options.jobs, [&](std::size_t i) {
    const auto& task = tasks[i];
    const std::string name = RunLayout::dataset_name(task.system.kind, task.regime);
    JobEntry job;
    job.id = "generate:" + name;
    job.stage = "generate";
    job.started = utc_timestamp();
    try {
      const auto files =
          solver::generate_dataset(config.dataset_config(task.system, task.regime), layout.data_dir(), name);
      for (const auto& f : files) {
        job.artifacts.push_back(make_artifact(run_dir, f.binary, ArtifactFormat::DatasetBinary));
        job.artifacts.push_back(make_artifact(run_dir, f.metadata, ArtifactFormat::Json));
        const auto meta = read_json_file(f.metadata);
        job.details[meta.at("split").get<std::string>() + "_rejections"] = meta.at("rejections");
      }
      job.status = JobStatus::Ok;
      log::info("generated " + name);
    } catch (const std::exception& e) {
      job.status = JobStatus::Failed;
      job.message = e.what();
      log::error("generate " + name + " failed: " + e.what());
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
