#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbench/models/simulator_model.hpp"
#include "sgbench/solver/dataset.hpp"
#include "sgbench/tensor/adamw.hpp"
#include "sgbench/training/sampling.hpp"

namespace sgbench::training {

struct TrainConfig {
  /// 0 for the prediction-only baseline, 0.01 for the semigroup-regularized variant.
  double lambda_sg = 0.0;
  tensor::AdamWConfig optimizer;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::size_t sg_batch_size = 8;
  /// Validation pairs drawn once per validation trajectory.
  std::size_t val_pairs_per_trajectory = 2;
  std::uint64_t seed = 0;
  SeenPairPolicy policy;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_pred = 0.0;
  double train_sg = 0.0;
  double val_pred = 0.0;
  std::size_t skipped_steps = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double lambda_sg = 0.0;
  std::size_t steps = 0;
  std::size_t skipped_steps = 0;
  std::size_t best_epoch = 0;
  double best_val_pred = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure_reason;
  std::string checkpoint_path;
};

struct TrainResult {
  models::SimulatorModel model;
  TrainReport report;
};

/// Minimizes L_pred + lambda_sg * L_sg with AdamW and global-norm clipping.
/// One epoch is ceil(N_train / batch_size) steps. Validation L_pred is
/// measured every epoch on a fixed set of validation pairs and the
/// parameters with the lowest value are returned. Steps with non-finite
/// losses or gradients are skipped; a run with no finite validation loss is
/// reported as failed instead of throwing.
TrainResult train(models::SimulatorModel model, const solver::Dataset& train_set,
                  const solver::Dataset& val_set, const TrainConfig& config);

nlohmann::json to_json(const TrainReport& report);
TrainReport train_report_from_json(const nlohmann::json& j);
/// Columns: epoch, train_pred, train_sg, val_pred.
void write_loss_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace sgbench::training
