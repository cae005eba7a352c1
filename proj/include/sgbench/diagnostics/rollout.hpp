#pragma once

#include <span>
#include <vector>

#include "sgbench/core/simulator.hpp"
#include "sgbench/solver/dataset.hpp"

namespace sgbench::diagnostics {

struct RolloutResult {
  /// Predicted states at every saved time; states[0] is u0.
  std::vector<Field> states;
  bool truncated = false;
  /// First saved-time index that could not be reached with a finite state.
  std::size_t truncated_at = 0;
};

/// Autoregressive rollout u_{n+1} = G(u_n, rollout_dt) from u0 to t_max,
/// sampled at the saved times. rollout_dt must divide the saved spacing.
/// After a non-finite state the last finite state stands in for the rest.
std::vector<RolloutResult> rollout_batch(const Simulator& model, std::span<const Field> initial,
                                         double rollout_dt, const solver::GridSpec& grid);

RolloutResult rollout(const Simulator& model, const Field& u0, double rollout_dt,
                      const solver::GridSpec& grid);

struct RolloutMetrics {
  /// Mean of per-time relL2 over saved times t_1 .. t_{T-1}.
  double auc = 0.0;
  /// relL2 at t_max.
  double final_error = 0.0;
};

/// predicted and reference hold the same saved times, index 0 = t_0.
RolloutMetrics rollout_metrics(std::span<const Field> predicted, std::span<const Field> reference,
                               double eps, double dx);

std::vector<Field> trajectory_states(const solver::Trajectory& traj);

}  // namespace sgbench::diagnostics
