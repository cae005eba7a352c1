#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sgbench::pipeline {

enum class JobStatus { Ok, Failed, Skipped };
std::string_view to_string(JobStatus status);
JobStatus parse_job_status(std::string_view name);

/// What a manifest format check does with a file.
enum class ArtifactFormat {
  Json,           // parses as JSON
  Config,         // parses as an experiment config
  DatasetBinary,  // header and length check, plus sidecar
  Checkpoint,     // checkpoint manifest and blob load
  RecordsCsv,     // header and row structure
  Csv,            // non-empty, CRLF header line
  Markdown,       // non-empty
};
std::string_view to_string(ArtifactFormat format);
ArtifactFormat parse_artifact_format(std::string_view name);

struct Artifact {
  /// Relative to the run directory, '/' separated.
  std::string path;
  ArtifactFormat format = ArtifactFormat::Json;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct JobEntry {
  std::string id;
  std::string stage;
  JobStatus status = JobStatus::Ok;
  std::string message;
  std::string started;
  std::string finished;
  std::vector<Artifact> artifacts;
  /// Stage-specific details such as flagged-record counts.
  nlohmann::json details = nlohmann::json::object();
};

struct RunManifest {
  std::string run_id;
  std::string config_hash;
  std::string tool_version;
  std::string started;
  std::string finished;
  std::vector<JobEntry> jobs;

  const JobEntry* find(const std::string& id) const;
  /// Replaces the entry with the same id or appends.
  void upsert(JobEntry entry);
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kConfigFile = "config.json";

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Loads `<run_dir>/manifest.json` or returns nullopt if absent.
std::optional<RunManifest> load_manifest(const std::filesystem::path& run_dir);
void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);

/// Hashes and sizes a file written by the pipeline. `file` is a path under `run_dir`, not relative to it.
Artifact make_artifact(const std::filesystem::path& run_dir, const std::filesystem::path& file,
                       ArtifactFormat format);

/// Throws Format or Io if the file is missing, changed since hashing or malformed.
void check_artifact(const std::filesystem::path& run_dir, const Artifact& artifact);

/// Checks every artifact of every job, stamps the finish time and writes the manifest.
void finalize_manifest(const std::filesystem::path& run_dir, RunManifest& manifest);

/// Serializes manifest updates from concurrent jobs.
class ManifestWriter {
public:
  ManifestWriter(std::filesystem::path run_dir, RunManifest manifest);

  void record(JobEntry entry);
  RunManifest snapshot() const;
  void finalize();

private:
  std::filesystem::path run_dir_;
  RunManifest manifest_;
  mutable std::mutex mutex_;
};

}  // namespace sgbench::pipeline
