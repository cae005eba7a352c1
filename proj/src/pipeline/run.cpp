#include "sgbench/pipeline/run.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "sgbench/core/error.hpp"

namespace sgbench::pipeline {

std::string RunLayout::dataset_name(solver::PdeKind system, solver::Regime regime) {
  return std::string(solver::to_string(system)) + "_" + std::string(solver::to_string(regime));
}

std::filesystem::path RunLayout::dataset(solver::PdeKind system, solver::Regime regime,
                                         solver::Split split) const {
  return data_dir() /
         (dataset_name(system, regime) + "_" + std::string(solver::to_string(split)) + ".sgpd");
}

std::filesystem::path RunLayout::checkpoint_base(const std::string& job_id) const {
  return models_dir() / job_id;
}

std::filesystem::path RunLayout::train_report(const std::string& job_id) const {
  return models_dir() / (job_id + ".report.json");
}

std::filesystem::path RunLayout::loss_csv(const std::string& job_id) const {
  return models_dir() / (job_id + ".loss.csv");
}

std::filesystem::path RunLayout::records_csv(const std::string& run_id) const {
  return records_dir() / (run_id + ".csv");
}

std::filesystem::path RunLayout::records_json(const std::string& run_id) const {
  return records_dir() / (run_id + ".json");
}

Filter Filter::parse(const std::string& text) {
  const auto eq = text.find('=');
  require(eq != std::string::npos && eq > 0 && eq + 1 < text.size(), ErrorKind::Config,
          "filter must look like key=value: " + text);
  Filter f{text.substr(0, eq), text.substr(eq + 1)};
  require(f.key == "system" || f.key == "family" || f.key == "variant" || f.key == "seed" ||
              f.key == "regime",
          ErrorKind::Config, "unknown filter key: " + f.key);
  return f;
}

bool matches(const std::vector<Filter>& filters, const RunKey& key) {
  for (const auto& f : filters) {
    const std::string value = f.key == "system"    ? key.system
                              : f.key == "family"  ? key.family
                              : f.key == "variant" ? key.variant
                              : f.key == "seed"    ? std::to_string(key.seed)
                                                   : key.regime;
    // Regime filters do not restrict training jobs.
    if (f.key == "regime" && key.regime.empty()) continue;
    if (value != f.value) return false;
  }
  return true;
}

std::vector<RunKey> training_grid(const ExperimentConfig& config) {
  std::vector<RunKey> keys;
  for (const auto& system : config.systems) {
    for (auto family : config.families) {
      for (const auto& variant : config.variants) {
        for (auto seed : config.seeds()) {
          keys.push_back({std::string(solver::to_string(system.kind)),
                          std::string(models::to_string(family)), variant.name, seed, ""});
        }
      }
    }
  }
  return keys;
}

void run_parallel(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  threads.clear();
  if (first_error) std::rethrow_exception(first_error);
}

OpenRun open_run(const std::filesystem::path& run_dir) {
  OpenRun run;
  run.layout.root = run_dir;
  require(std::filesystem::exists(run.layout.config()), ErrorKind::Io,
          run_dir.string() + " has no config.json; run generate first");
  run.config = load_config(run.layout.config());
  auto manifest = load_manifest(run_dir);
  require(manifest.has_value(), ErrorKind::Io, run_dir.string() + " has no manifest.json");
  require(manifest->config_hash == config_hash(run.config), ErrorKind::Config,
          "config.json does not match the hash recorded in the manifest");
  run.manifest = std::move(*manifest);
  return run;
}

bool job_is_current(const RunLayout& layout, const RunManifest& manifest, const std::string& id) {
  const auto* job = manifest.find(id);
  if (job == nullptr || job->status != JobStatus::Ok) return false;
  try {
    for (const auto& a : job->artifacts) check_artifact(layout.root, a);
  } catch (const Error&) {
    return false;
  }
  return true;
}

std::string tool_version() { return "sgbench " SGBENCH_VERSION; }

}  // namespace sgbench::pipeline
