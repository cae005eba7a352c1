#include "sgbench/pipeline/manifest.hpp"

#include <algorithm>
#include <fstream>

#include "sgbench/core/error.hpp"
#include "sgbench/models/checkpoint.hpp"
#include "sgbench/pipeline/config.hpp"
#include "sgbench/pipeline/hashing.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/records.hpp"
#include "sgbench/solver/dataset.hpp"

namespace sgbench::pipeline {
namespace {

using nlohmann::json;

constexpr std::pair<JobStatus, std::string_view> kStatusNames[] = {
    {JobStatus::Ok, "ok"}, {JobStatus::Failed, "failed"}, {JobStatus::Skipped, "skipped"}};

constexpr std::pair<ArtifactFormat, std::string_view> kFormatNames[] = {
    {ArtifactFormat::Json, "json"},
    {ArtifactFormat::Config, "config"},
    {ArtifactFormat::DatasetBinary, "dataset"},
    {ArtifactFormat::Checkpoint, "checkpoint"},
    {ArtifactFormat::RecordsCsv, "records_csv"},
    {ArtifactFormat::Csv, "csv"},
    {ArtifactFormat::Markdown, "markdown"},
};

void check_format(const std::filesystem::path& file, ArtifactFormat format) {
  switch (format) {
    case ArtifactFormat::Json:
      read_json_file(file);
      break;
    case ArtifactFormat::Config:
      load_config(file);
      break;
    case ArtifactFormat::DatasetBinary:
      solver::load_dataset(file);
      break;
    case ArtifactFormat::Checkpoint:
      models::load_checkpoint(file);
      break;
    case ArtifactFormat::RecordsCsv:
      read_records_csv(file);
      break;
    case ArtifactFormat::Csv: {
      std::ifstream in(file, std::ios::binary);
      std::string header;
      require(std::getline(in, header) && header.size() > 1 && header.back() == '\r',
              ErrorKind::Format, file.string() + ": missing CRLF header line");
      break;
    }
    case ArtifactFormat::Markdown:
      require(std::filesystem::file_size(file) > 0, ErrorKind::Format, file.string() + ": empty");
      break;
  }
}

}  // namespace

std::string_view to_string(JobStatus status) {
  for (const auto& [s, name] : kStatusNames) {
    if (s == status) return name;
  }
  return "unknown";
}

JobStatus parse_job_status(std::string_view name) {
  for (const auto& [s, n] : kStatusNames) {
    if (n == name) return s;
  }
  fail(ErrorKind::Format, "unknown job status: " + std::string(name));
}

std::string_view to_string(ArtifactFormat format) {
  for (const auto& [f, name] : kFormatNames) {
    if (f == format) return name;
  }
  return "unknown";
}

ArtifactFormat parse_artifact_format(std::string_view name) {
  for (const auto& [f, n] : kFormatNames) {
    if (n == name) return f;
  }
  fail(ErrorKind::Format, "unknown artifact format: " + std::string(name));
}

const JobEntry* RunManifest::find(const std::string& id) const {
  for (const auto& j : jobs) {
    if (j.id == id) return &j;
  }
  return nullptr;
}

void RunManifest::upsert(JobEntry entry) {
  for (auto& j : jobs) {
    if (j.id == entry.id) {
      j = std::move(entry);
      return;
    }
  }
  jobs.push_back(std::move(entry));
}

json to_json(const RunManifest& m) {
  json jobs = json::array();
  for (const auto& job : m.jobs) {
    json artifacts = json::array();
    for (const auto& a : job.artifacts) {
      artifacts.push_back({{"path", a.path},
                           {"format", to_string(a.format)},
                           {"sha256", a.sha256},
                           {"bytes", a.bytes}});
    }
    jobs.push_back({{"id", job.id},
                    {"stage", job.stage},
                    {"status", to_string(job.status)},
                    {"message", job.message},
                    {"started", job.started},
                    {"finished", job.finished},
                    {"artifacts", artifacts},
                    {"details", job.details}});
  }
  return {{"run_id", m.run_id},       {"config_hash", m.config_hash}, {"tool_version", m.tool_version},
          {"started", m.started},     {"finished", m.finished},       {"jobs", jobs}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& jj : j.at("jobs")) {
      JobEntry e;
      e.id = jj.at("id").get<std::string>();
      e.stage = jj.at("stage").get<std::string>();
      e.status = parse_job_status(jj.at("status").get<std::string>());
      e.message = jj.at("message").get<std::string>();
      e.started = jj.at("started").get<std::string>();
      e.finished = jj.at("finished").get<std::string>();
      e.details = jj.at("details");
      for (const auto& a : jj.at("artifacts")) {
        e.artifacts.push_back({a.at("path").get<std::string>(),
                               parse_artifact_format(a.at("format").get<std::string>()),
                               a.at("sha256").get<std::string>(), a.at("bytes").get<std::uintmax_t>()});
      }
      m.jobs.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("manifest: ") + e.what());
  }
  return m;
}

std::optional<RunManifest> load_manifest(const std::filesystem::path& run_dir) {
  const auto path = run_dir / kManifestFile;
  if (!std::filesystem::exists(path)) return std::nullopt;
  return manifest_from_json(read_json_file(path));
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  write_text_atomic(run_dir / kManifestFile, to_json(manifest).dump(2) + "\n");
}

Artifact make_artifact(const std::filesystem::path& run_dir, const std::filesystem::path& file,
                       ArtifactFormat format) {
  Artifact a;
  a.path = std::filesystem::relative(std::filesystem::absolute(file), std::filesystem::absolute(run_dir))
               .generic_string();
  a.format = format;
  a.sha256 = sha256_file(file);
  a.bytes = std::filesystem::file_size(file);
  return a;
}

void check_artifact(const std::filesystem::path& run_dir, const Artifact& artifact) {
  const auto file = run_dir / artifact.path;
  require(std::filesystem::is_regular_file(file), ErrorKind::Io,
          "manifest artifact missing: " + artifact.path);
  require(std::filesystem::file_size(file) == artifact.bytes && sha256_file(file) == artifact.sha256,
          ErrorKind::Format, "manifest artifact changed since it was recorded: " + artifact.path);
  check_format(file, artifact.format);
}

void finalize_manifest(const std::filesystem::path& run_dir, RunManifest& manifest) {
  for (const auto& job : manifest.jobs) {
    for (const auto& a : job.artifacts) check_artifact(run_dir, a);
  }
  manifest.finished = utc_timestamp();
  write_manifest(run_dir, manifest);
}

ManifestWriter::ManifestWriter(std::filesystem::path run_dir, RunManifest manifest)
    : run_dir_(std::move(run_dir)), manifest_(std::move(manifest)) {}

void ManifestWriter::record(JobEntry entry) {
  std::lock_guard lock(mutex_);
  manifest_.upsert(std::move(entry));
  write_manifest(run_dir_, manifest_);
}

RunManifest ManifestWriter::snapshot() const {
  std::lock_guard lock(mutex_);
  return manifest_;
}

void ManifestWriter::finalize() {
  std::lock_guard lock(mutex_);
  finalize_manifest(run_dir_, manifest_);
}

}  // namespace sgbench::pipeline
