#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbench/diagnostics/evaluate.hpp"

namespace sgbench::pipeline {

inline constexpr const char* kRecordsHeader =
    "run_id,system,family,variant,seed,trajectory_id,one_step,rollout_auc,rollout_final,sg_seen,"
    "sg_unseen,flags";

/// Calibration rows use this variant name with family "identity" or "solver".
inline constexpr const char* kCalibrationVariant = "calibration";

/// Identifies one evaluated model under one regime.
struct RunKey {
  std::string system;
  std::string family;
  std::string variant;
  std::uint64_t seed = 0;
  std::string regime;

  /// "<system>-<family>-<variant>-s<seed>"
  std::string job_id() const;
  /// job_id() + "@" + regime
  std::string run_id() const;
  bool calibration() const { return variant == kCalibrationVariant; }

  static RunKey parse(const std::string& run_id);
  auto operator<=>(const RunKey&) const = default;
};

struct RecordRow {
  RunKey key;
  diagnostics::DiagnosticRecord record;
};

/// RFC 4180 with CRLF line endings and round-trip (%.17g) numbers.
void write_records_csv(const std::filesystem::path& path, const std::vector<RecordRow>& rows);
std::vector<RecordRow> read_records_csv(const std::filesystem::path& path);

/// Mirror of the CSV plus the evaluation tallies. Non-finite values become null.
nlohmann::json records_to_json(const RunKey& key, const diagnostics::Evaluation& eval);
void write_records_json(const std::filesystem::path& path, const RunKey& key,
                        const diagnostics::Evaluation& eval);

std::vector<RecordRow> to_rows(const RunKey& key, const diagnostics::Evaluation& eval);

/// Splits one CSV line into fields, honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace sgbench::pipeline
