#pragma once

#include <random>
#include <vector>

#include "sgbench/core/field.hpp"
#include "sgbench/solver/dataset.hpp"

namespace sgbench::training {

/// Training-style increments: every queried time (t for prediction; s, t and
/// s + t for composition) stays at or below max_fraction * t_max.
struct SeenPairPolicy {
  double max_fraction = 0.5;

  /// Largest admissible increment in saved-time steps.
  std::size_t max_steps(const solver::GridSpec& grid) const;
};

/// (start index, offset in steps) of a supervised pair inside a trajectory.
struct PredCell {
  std::size_t start = 0;
  std::size_t offset = 0;
  bool operator==(const PredCell&) const = default;
};

/// Anchor index and the two increments (in steps) of a composition triple.
struct SgCell {
  std::size_t anchor = 0;
  std::size_t s_steps = 0;
  std::size_t t_steps = 0;
  bool operator==(const SgCell&) const = default;
};

/// All (i, k) with k >= 1, i + k <= T - 1, k <= max_steps.
std::vector<PredCell> admissible_pred_cells(std::size_t n_times, std::size_t max_steps);
/// All (m, a, b) with a, b >= 1, a + b <= max_steps, m + a + b <= T - 1.
std::vector<SgCell> admissible_sg_cells(std::size_t n_times, std::size_t max_steps);

struct PredBatch {
  std::vector<Field> u;
  std::vector<double> t;
  std::vector<Field> target;
  std::vector<std::size_t> trajectory;
  std::vector<PredCell> cell;

  std::size_t size() const { return u.size(); }
};

struct SgBatch {
  std::vector<Field> u;
  std::vector<double> s;
  std::vector<double> t;

  std::size_t size() const { return u.size(); }
};

PredBatch make_pred_batch(const solver::Dataset& ds, std::span<const std::size_t> trajectories,
                          std::span<const PredCell> cells);

/// Uniform trajectory, then a uniform admissible (start, offset) cell.
/// Targets are read from the stored trajectory; no solver calls.
PredBatch sample_pred_batch(const solver::Dataset& ds, std::mt19937_64& rng, std::size_t batch_size,
                            const SeenPairPolicy& policy = {});

/// Uniform trajectory, then a uniform admissible (anchor, s, t) cell.
SgBatch sample_sg_batch(const solver::Dataset& ds, std::mt19937_64& rng, std::size_t batch_size,
                        const SeenPairPolicy& policy = {});

}  // namespace sgbench::training
