#include "sgbench/training/sampling.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"

namespace sgbench::training {

std::size_t SeenPairPolicy::max_steps(const solver::GridSpec& grid) const {
  const double steps = max_fraction * grid.t_max / grid.saved_dt();
  return static_cast<std::size_t>(std::floor(steps + 1e-9));
}

std::vector<PredCell> admissible_pred_cells(std::size_t n_times, std::size_t max_steps) {
  std::vector<PredCell> cells;
  for (std::size_t k = 1; k <= max_steps && k < n_times; ++k) {
    for (std::size_t i = 0; i + k < n_times; ++i) cells.push_back({i, k});
  }
  return cells;
}

std::vector<SgCell> admissible_sg_cells(std::size_t n_times, std::size_t max_steps) {
  std::vector<SgCell> cells;
  for (std::size_t a = 1; a < max_steps; ++a) {
    for (std::size_t b = 1; a + b <= max_steps; ++b) {
      for (std::size_t m = 0; m + a + b < n_times; ++m) cells.push_back({m, a, b});
    }
  }
  return cells;
}

PredBatch make_pred_batch(const solver::Dataset& ds, std::span<const std::size_t> trajectories,
                          std::span<const PredCell> cells) {
  require(trajectories.size() == cells.size(), ErrorKind::ShapeMismatch,
          "make_pred_batch: trajectory and cell lists differ in length");
  PredBatch batch;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const auto& traj = ds.trajectories.at(trajectories[n]);
    const PredCell c = cells[n];
    require(c.offset >= 1 && c.start + c.offset < traj.n_times(), ErrorKind::InvalidArgument,
            "make_pred_batch: cell outside trajectory");
    batch.u.push_back(traj.state(c.start));
    batch.t.push_back(ds.grid.time(c.start + c.offset) - ds.grid.time(c.start));
    batch.target.push_back(traj.state(c.start + c.offset));
    batch.trajectory.push_back(trajectories[n]);
    batch.cell.push_back(c);
  }
  return batch;
}

PredBatch sample_pred_batch(const solver::Dataset& ds, std::mt19937_64& rng, std::size_t batch_size,
                            const SeenPairPolicy& policy) {
  require(ds.split == solver::Split::Train, ErrorKind::InvalidArgument,
          "sample_pred_batch: training samples must come from the train split");
  require(ds.size() > 0, ErrorKind::InvalidArgument, "sample_pred_batch: empty dataset");
  const auto cells = admissible_pred_cells(ds.grid.n_times, policy.max_steps(ds.grid));
  require(!cells.empty(), ErrorKind::InvalidArgument, "sample_pred_batch: no admissible cells");
  std::uniform_int_distribution<std::size_t> pick_traj(0, ds.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_cell(0, cells.size() - 1);
  std::vector<std::size_t> trajs(batch_size);
  std::vector<PredCell> chosen(batch_size);
  for (std::size_t n = 0; n < batch_size; ++n) {
    trajs[n] = pick_traj(rng);
    chosen[n] = cells[pick_cell(rng)];
  }
  return make_pred_batch(ds, trajs, chosen);
}

SgBatch sample_sg_batch(const solver::Dataset& ds, std::mt19937_64& rng, std::size_t batch_size,
                        const SeenPairPolicy& policy) {
  require(ds.size() > 0, ErrorKind::InvalidArgument, "sample_sg_batch: empty dataset");
  const auto cells = admissible_sg_cells(ds.grid.n_times, policy.max_steps(ds.grid));
  require(!cells.empty(), ErrorKind::InvalidArgument, "sample_sg_batch: no admissible cells");
  std::uniform_int_distribution<std::size_t> pick_traj(0, ds.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_cell(0, cells.size() - 1);
  SgBatch batch;
  for (std::size_t n = 0; n < batch_size; ++n) {
    const auto& traj = ds.trajectories[pick_traj(rng)];
    const SgCell c = cells[pick_cell(rng)];
    batch.u.push_back(traj.state(c.anchor));
    batch.s.push_back(ds.grid.time(c.s_steps));
    batch.t.push_back(ds.grid.time(c.t_steps));
  }
  return batch;
}

}  // namespace sgbench::training
