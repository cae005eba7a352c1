#include "sgbench/diagnostics/rollout.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"
#include "sgbench/diagnostics/metrics.hpp"

namespace sgbench::diagnostics {

std::vector<RolloutResult> rollout_batch(const Simulator& model, std::span<const Field> initial,
                                         double rollout_dt, const solver::GridSpec& grid) {
  const double spacing = grid.saved_dt();
  require(rollout_dt > 0.0 && rollout_dt <= spacing * (1.0 + 1e-12), ErrorKind::InvalidArgument,
          "rollout: rollout_dt must lie in (0, saved spacing]");
  const auto substeps = static_cast<std::size_t>(std::llround(spacing / rollout_dt));
  require(substeps >= 1 &&
              std::abs(static_cast<double>(substeps) * rollout_dt - spacing) <= 1e-9 * spacing,
          ErrorKind::InvalidArgument, "rollout: rollout_dt must divide the saved spacing");

  const std::size_t n = initial.size();
  std::vector<RolloutResult> results(n);
  std::vector<Field> current(initial.begin(), initial.end());
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) results[i].states.push_back(initial[i]);

  for (std::size_t k = 1; k < grid.n_times; ++k) {
    for (std::size_t sub = 0; sub < substeps; ++sub) {
      std::vector<std::size_t> active;
      std::vector<Field> inputs;
      for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) {
          active.push_back(i);
          inputs.push_back(current[i]);
        }
      }
      if (active.empty()) break;
      const std::vector<double> dts(active.size(), rollout_dt);
      auto outputs = model.advance_batch(inputs, dts);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t i = active[a];
        if (all_finite(outputs[a])) {
          current[i] = std::move(outputs[a]);
        } else {
          alive[i] = false;
          results[i].truncated = true;
          results[i].truncated_at = k;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) results[i].states.push_back(current[i]);
  }
  return results;
}

RolloutResult rollout(const Simulator& model, const Field& u0, double rollout_dt,
                      const solver::GridSpec& grid) {
  const Field initial[1] = {u0};
  return std::move(rollout_batch(model, initial, rollout_dt, grid).front());
}

RolloutMetrics rollout_metrics(std::span<const Field> predicted, std::span<const Field> reference,
                               double eps, double dx) {
  require(predicted.size() == reference.size() && predicted.size() >= 2, ErrorKind::ShapeMismatch,
          "rollout_metrics: predicted and reference must share >= 2 saved times");
  RolloutMetrics m;
  double acc = 0.0;
  for (std::size_t k = 1; k < predicted.size(); ++k) {
    const double e = rel_l2(predicted[k], reference[k], eps, dx);
    acc += e;
    if (k + 1 == predicted.size()) m.final_error = e;
  }
  m.auc = acc / static_cast<double>(predicted.size() - 1);
  return m;
}

std::vector<Field> trajectory_states(const solver::Trajectory& traj) {
  std::vector<Field> states;
  for (std::size_t k = 0; k < traj.n_times(); ++k) states.push_back(traj.state(k));
  return states;
}

}  // namespace sgbench::diagnostics
