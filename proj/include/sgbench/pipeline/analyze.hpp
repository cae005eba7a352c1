#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbench/pipeline/records.hpp"
#include "sgbench/stats/bootstrap.hpp"
#include "sgbench/stats/tests.hpp"

namespace sgbench::pipeline {

struct AnalysisSettings {
  std::size_t n_resamples = 2000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::string baseline_variant = "baseline";
  std::string treated_variant = "sg";
};

inline constexpr const char* kMetricNames[] = {"one_step", "rollout_auc", "rollout_final", "sg_seen",
                                               "sg_unseen"};

double metric_value(const diagnostics::DiagnosticRecord& r, std::string_view metric);

struct MetricSummary {
  std::string metric;
  std::size_t n = 0;
  /// Empty when fewer than two complete records are available.
  std::optional<stats::BootstrapResult> mean;
};

struct GroupSummary {
  std::string system;
  std::string regime;
  std::string family;
  std::string variant;
  std::size_t n_records = 0;
  std::size_t n_complete = 0;
  std::vector<MetricSummary> metrics;
  /// Spearman(sg_unseen, rollout_auc) within the group.
  std::optional<double> rho;

  const MetricSummary& metric(std::string_view name) const;
};

/// Baseline-minus-treated comparison of one metric over matched records.
/// Records match on (system, family, seed, regime, trajectory_id).
struct PairedComparison {
  std::string metric;
  std::string scope;
  std::size_t n_pairs = 0;
  double mean_baseline = 0.0;
  double mean_treated = 0.0;
  std::optional<stats::BootstrapResult> diff;
  std::optional<stats::WilcoxonResult> wilcoxon;
  std::optional<double> cohens_d;
};

struct AnalysisResult {
  std::vector<GroupSummary> groups;
  std::vector<PairedComparison> paired;
  /// Over complete records of trained models, pooled across systems, regimes, families and variants.
  std::optional<stats::AssociationResult> pooled;
  std::size_t pooled_points = 0;
  /// mean(sg_unseen) - mean(sg_seen) over complete trained-model records.
  std::optional<double> seen_unseen_gap;
  std::optional<stats::BootstrapResult> seen_unseen_gap_ci;
  std::size_t n_records = 0;
  std::size_t n_complete = 0;
  std::vector<RecordRow> flagged;
};

/// Pure function of the rows (in the given order) and the settings.
AnalysisResult analyze_records(const std::vector<RecordRow>& rows, const AnalysisSettings& settings);

/// The summary.json document.
nlohmann::json summary_json(const AnalysisResult& result, const AnalysisSettings& settings);

/// summary.csv: system, model, one_step, rollout, sg_unseen, rho for the
/// in-distribution groups of trained models.
std::string summary_csv(const AnalysisResult& result);

/// Per-record (sg_unseen, rollout_auc) points of trained models.
std::string scatter_csv(const std::vector<RecordRow>& rows);

/// Per-group seen and unseen semigroup means.
std::string seen_unseen_csv(const AnalysisResult& result);

}  // namespace sgbench::pipeline
