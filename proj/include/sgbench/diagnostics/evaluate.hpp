#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgbench/core/simulator.hpp"
#include "sgbench/diagnostics/metrics.hpp"
#include "sgbench/solver/dataset.hpp"

namespace sgbench::diagnostics {

struct TimePair {
  double s = 0.0;
  double t = 0.0;
};

struct DiagConfig {
  double epsilon = kDefaultEpsilon;
  double rollout_dt = 0.05;
  /// Pairs with s + t <= seen_fraction * t_max.
  std::vector<TimePair> seen_pairs;
  /// Pairs with s + t > seen_fraction * t_max.
  std::vector<TimePair> unseen_pairs;
  double seen_fraction = 0.5;
  /// Seeds the choice of anchor state per (trajectory, pair).
  std::uint64_t anchor_seed = 0;

  /// All saved-grid pairs (i*delta, j*delta), i, j >= 1, s + t <= t_max,
  /// split at seen_fraction * t_max.
  static DiagConfig grid_pairs(const solver::GridSpec& grid, double seen_fraction = 0.5);

  void validate(const solver::GridSpec& grid) const;
};

enum RecordFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagRolloutTruncated = 1u << 0,
  kFlagOneStepExcluded = 1u << 1,
  kFlagSgSeenExcluded = 1u << 2,
  kFlagSgUnseenExcluded = 1u << 3,
};

/// Human-readable names of the bits set in flags, separated by '|'.
std::string describe_flags(std::uint32_t flags);

struct DiagnosticRecord {
  std::size_t trajectory_id = 0;
  double one_step = 0.0;
  double rollout_auc = 0.0;
  double rollout_final = 0.0;
  double sg_seen = 0.0;
  double sg_unseen = 0.0;
  std::uint32_t flags = kFlagNone;

  /// True if every metric is finite; flagged sub-results may still have been dropped.
  bool complete() const;
};

/// Attempted = included + excluded for each kind of sub-evaluation.
struct Tally {
  std::size_t attempted = 0;
  std::size_t included = 0;
  std::size_t excluded = 0;

  void add(bool ok) {
    ++attempted;
    ok ? ++included : ++excluded;
  }
  Tally& operator+=(const Tally& other);
};

struct Evaluation {
  std::vector<DiagnosticRecord> records;
  Tally one_step;
  Tally sg_seen;
  Tally sg_unseen;
  std::size_t truncated_rollouts = 0;
};

/// Runs the full per-trajectory protocol on a test split. Sub-results that
/// come out non-finite are dropped from the means and counted.
Evaluation evaluate_model(const Simulator& model, const solver::Dataset& test,
                          const DiagConfig& config);

}  // namespace sgbench::diagnostics
