#include <map>
#include <memory>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/diagnostics/reference_models.hpp"
#include "sgbench/models/checkpoint.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/run.hpp"
#include "sgbench/solver/reference.hpp"

namespace sgbench::pipeline {
namespace {

constexpr const char* kIdentityFamily = "identity";
constexpr const char* kSolverFamily = "solver";

nlohmann::json tally_details(const diagnostics::Evaluation& eval) {
  auto tally = [](const diagnostics::Tally& t) {
    return nlohmann::json{{"attempted", t.attempted}, {"included", t.included}, {"excluded", t.excluded}};
  };
  std::size_t flagged = 0;
  for (const auto& r : eval.records) flagged += r.flags != diagnostics::kFlagNone;
  return {{"records", eval.records.size()},
          {"flagged_records", flagged},
          {"one_step", tally(eval.one_step)},
          {"sg_seen", tally(eval.sg_seen)},
          {"sg_unseen", tally(eval.sg_unseen)},
          {"truncated_rollouts", eval.truncated_rollouts}};
}

}  // namespace

StageOutcome run_evaluate(const std::filesystem::path& run_dir, const StageOptions& options) {
  auto run = open_run(run_dir);
  const auto& config = run.config;
  const auto& layout = run.layout;
  const auto diag = config.diag_config();
  std::filesystem::create_directories(layout.records_dir());

  std::vector<RunKey> jobs;
  for (const auto& system : config.systems) {
    for (auto regime : config.regimes) {
      const std::string sys(solver::to_string(system.kind));
      const std::string reg(solver::to_string(regime));
      for (const char* family : {kIdentityFamily, kSolverFamily}) {
        RunKey key{sys, family, kCalibrationVariant, 0, reg};
        bool keep = true;
        for (const auto& f : options.filters) {
          if ((f.key == "system" && f.value != sys) || (f.key == "regime" && f.value != reg)) keep = false;
        }
        if (keep) jobs.push_back(key);
      }
    }
  }
  for (const auto& trained : training_grid(config)) {
    for (auto regime : config.regimes) {
      RunKey key = trained;
      key.regime = std::string(solver::to_string(regime));
      if (matches(options.filters, key)) jobs.push_back(key);
    }
  }

  std::map<std::pair<std::string, std::string>, std::shared_ptr<const solver::Dataset>> tests;
  for (const auto& key : jobs) {
    const auto k = std::make_pair(key.system, key.regime);
    if (tests.contains(k)) continue;
    tests[k] = std::make_shared<const solver::Dataset>(solver::load_dataset(layout.dataset(
        solver::parse_pde_kind(key.system), solver::parse_regime(key.regime), solver::Split::Test)));
  }

  ManifestWriter writer(run_dir, run.manifest);
  StageOutcome outcome;
  std::mutex outcome_mutex;
  log::info("evaluate: " + std::to_string(jobs.size()) + " jobs");

  run_parallel(jobs.size(), options.jobs, [&](std::size_t i) {
    const auto& key = jobs[i];
    const std::string run_id = key.run_id();
    JobEntry job;
    job.id = "eval:" + run_id;
    job.stage = "evaluate";
    job.started = utc_timestamp();

    std::string checkpoint_sha;
    std::unique_ptr<Simulator> model;
    try {
      const auto& test = *tests.at({key.system, key.regime});
      if (key.calibration()) {
        if (!options.force && job_is_current(layout, run.manifest, job.id)) {
          std::lock_guard lock(outcome_mutex);
          ++outcome.skipped;
          return;
        }
        if (key.family == kIdentityFamily) {
          model = std::make_unique<diagnostics::IdentitySimulator>();
        } else {
          model = std::make_unique<solver::ReferenceSimulator>(test.system, test.grid, test.solver);
        }
      } else {
        const auto* train_job = run.manifest.find("train:" + key.job_id());
        if (train_job == nullptr || train_job->status != JobStatus::Ok || train_job->artifacts.empty()) {
          job.status = JobStatus::Skipped;
          job.message = "no trained checkpoint for " + key.job_id();
        } else {
          checkpoint_sha = train_job->artifacts.front().sha256;
          const auto* previous = run.manifest.find(job.id);
          if (!options.force && job_is_current(layout, run.manifest, job.id) &&
              previous->details.value("checkpoint_sha256", "") == checkpoint_sha) {
            std::lock_guard lock(outcome_mutex);
            ++outcome.skipped;
            return;
          }
          model = std::make_unique<models::SimulatorModel>(
              models::load_checkpoint(run_dir / train_job->artifacts.front().path));
        }
      }

      if (model) {
        const auto eval = diagnostics::evaluate_model(*model, test, diag);
        write_records_csv(layout.records_csv(run_id), to_rows(key, eval));
        write_records_json(layout.records_json(run_id), key, eval);
        job.artifacts.push_back(
            make_artifact(run_dir, layout.records_csv(run_id), ArtifactFormat::RecordsCsv));
        job.artifacts.push_back(make_artifact(run_dir, layout.records_json(run_id), ArtifactFormat::Json));
        job.details = tally_details(eval);
        if (!checkpoint_sha.empty()) job.details["checkpoint_sha256"] = checkpoint_sha;
        job.status = JobStatus::Ok;
        log::info("evaluated " + run_id);
      } else {
        log::warn("evaluate " + run_id + " skipped: " + job.message);
      }
    } catch (const std::exception& e) {
      job.status = JobStatus::Failed;
      job.message = e.what();
      log::error("evaluate " + run_id + " failed: " + e.what());
    }
    job.finished = utc_timestamp();
    {
      std::lock_guard lock(outcome_mutex);
      switch (job.status) {
        case JobStatus::Ok: ++outcome.ok; break;
        case JobStatus::Failed: ++outcome.failed; break;
        case JobStatus::Skipped: ++outcome.skipped; break;
      }
    }
    writer.record(std::move(job));
  });
  writer.finalize();
  return outcome;
}

}  // namespace sgbench::pipeline
