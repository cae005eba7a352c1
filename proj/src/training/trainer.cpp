#include "sgbench/training/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/tensor/ops.hpp"
#include "sgbench/training/losses.hpp"

namespace sgbench::training {

using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose};
  return std::mt19937_64(seq);
}

PredBatch fixed_validation_batch(const solver::Dataset& val, const TrainConfig& config) {
  auto rng = stream_rng(config.seed, 0x76616cu);
  const auto cells = admissible_pred_cells(val.grid.n_times, config.policy.max_steps(val.grid));
  require(!cells.empty(), ErrorKind::InvalidArgument, "train: no admissible validation pairs");
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::vector<std::size_t> trajs;
  std::vector<PredCell> chosen;
  for (std::size_t i = 0; i < val.size(); ++i) {
    for (std::size_t r = 0; r < config.val_pairs_per_trajectory; ++r) {
      trajs.push_back(i);
      chosen.push_back(cells[pick(rng)]);
    }
  }
  return make_pred_batch(val, trajs, chosen);
}

}  // namespace

TrainResult train(models::SimulatorModel model, const solver::Dataset& train_set,
                  const solver::Dataset& val_set, const TrainConfig& config) {
  require(config.batch_size >= 1, ErrorKind::InvalidArgument, "train: batch_size must be >= 1");
  require(config.lambda_sg >= 0.0, ErrorKind::InvalidArgument, "train: lambda_sg must be >= 0");
  require(train_set.size() > 0 && val_set.size() > 0, ErrorKind::InvalidArgument,
          "train: empty train or validation split");

  const auto started = std::chrono::steady_clock::now();
  const double dx = train_set.grid.dx();
  const bool use_sg = config.lambda_sg > 0.0;
  const std::size_t steps_per_epoch = (train_set.size() + config.batch_size - 1) / config.batch_size;

  auto rng = stream_rng(config.seed, 0x747261u);
  const PredBatch val_batch = fixed_validation_batch(val_set, config);
  tensor::AdamW optimizer(config.optimizer, model.parameters());

  TrainReport report;
  report.lambda_sg = config.lambda_sg;
  std::vector<Tensor> best_params = model.parameters();
  double best_val = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t counted = 0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const PredBatch pred_batch = sample_pred_batch(train_set, rng, config.batch_size, config.policy);
      SgBatch sg_batch;
      if (use_sg) sg_batch = sample_sg_batch(train_set, rng, config.sg_batch_size, config.policy);

      Tape tape;
      const auto bound = model.bind(tape);
      const DifferentiableMap f = [&bound](Var u, std::span<const double> dts) { return bound(u, dts); };
      double pred_value = 0.0, sg_value = 0.0;
      Var total;
      try {
        const Var lp = loss_pred(tape, f, pred_batch, dx);
        pred_value = lp.value()[0];
        total = lp;
        if (use_sg) {
          const Var ls = loss_sg(tape, f, sg_batch, dx);
          sg_value = ls.value()[0];
          total = tensor::add(lp, tensor::scale(ls, config.lambda_sg));
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFinite) throw;
        log::warn(std::string("train: ") + e.what() + "; step skipped");
        ++rec.skipped_steps;
        continue;
      }

      tape.backward(total);
      std::vector<Tensor> grads;
      grads.reserve(bound.params().size());
      for (const Var& p : bound.params()) grads.push_back(tape.grad(p));
      const auto outcome = optimizer.step(model.parameters(), std::move(grads));
      if (!outcome.applied) {
        ++rec.skipped_steps;
        continue;
      }
      ++report.steps;
      ++counted;
      rec.train_pred += pred_value;
      rec.train_sg += sg_value;
    }
    if (counted > 0) {
      rec.train_pred /= static_cast<double>(counted);
      rec.train_sg /= static_cast<double>(counted);
    } else {
      rec.train_pred = std::numeric_limits<double>::quiet_NaN();
      rec.train_sg = use_sg ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    }
    rec.val_pred = loss_pred_value(model, val_batch, dx);
    report.skipped_steps += rec.skipped_steps;
    if (std::isfinite(rec.val_pred) && rec.val_pred < best_val) {
      best_val = rec.val_pred;
      best_params = model.parameters();
      report.best_epoch = epoch;
    }
    report.epochs.push_back(rec);
    if (epoch == 1 || epoch % 25 == 0 || epoch == config.epochs) {
      char line[160];
      std::snprintf(line, sizeof line, "epoch %zu/%zu train_pred=%.4e train_sg=%.4e val_pred=%.4e",
                    epoch, config.epochs, rec.train_pred, rec.train_sg, rec.val_pred);
      log::debug(line);
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!std::isfinite(best_val)) {
    report.failed = true;
    report.failure_reason = "no finite validation loss in any epoch";
    report.best_val_pred = std::numeric_limits<double>::quiet_NaN();
    return {std::move(model), std::move(report)};
  }
  report.best_val_pred = best_val;
  return {models::SimulatorModel(model.config(), std::move(best_params)), std::move(report)};
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

nlohmann::json to_json(const TrainReport& report) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : report.epochs) {
    nlohmann::json row = {{"epoch", e.epoch},
                          {"train_pred", number_or_null(e.train_pred)},
                          {"val_pred", number_or_null(e.val_pred)},
                          {"skipped_steps", e.skipped_steps}};
    if (report.lambda_sg > 0.0) row["train_sg"] = number_or_null(e.train_sg);
    epochs.push_back(std::move(row));
  }
  return {{"epochs", epochs},
          {"lambda_sg", report.lambda_sg},
          {"steps", report.steps},
          {"skipped_steps", report.skipped_steps},
          {"best_epoch", report.best_epoch},
          {"best_val_pred", number_or_null(report.best_val_pred)},
          {"wall_seconds", report.wall_seconds},
          {"failed", report.failed},
          {"failure_reason", report.failure_reason},
          {"checkpoint_path", report.checkpoint_path}};
}

TrainReport train_report_from_json(const nlohmann::json& j) {
  TrainReport r;
  r.lambda_sg = j.at("lambda_sg").get<double>();
  r.steps = j.at("steps").get<std::size_t>();
  r.skipped_steps = j.at("skipped_steps").get<std::size_t>();
  r.best_epoch = j.at("best_epoch").get<std::size_t>();
  r.best_val_pred = number_from(j.at("best_val_pred"));
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.failed = j.at("failed").get<bool>();
  r.failure_reason = j.at("failure_reason").get<std::string>();
  r.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  for (const auto& row : j.at("epochs")) {
    EpochRecord e;
    e.epoch = row.at("epoch").get<std::size_t>();
    e.train_pred = number_from(row.at("train_pred"));
    e.val_pred = number_from(row.at("val_pred"));
    e.skipped_steps = row.at("skipped_steps").get<std::size_t>();
    e.train_sg = row.contains("train_sg") ? number_from(row.at("train_sg")) : 0.0;
    r.epochs.push_back(e);
  }
  return r;
}

void write_loss_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << "epoch,train_pred,train_sg,val_pred\r\n";
  char line[128];
  for (const auto& e : report.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\r\n", e.epoch, e.train_pred, e.train_sg,
                  e.val_pred);
    out << line;
  }
}

}  // namespace sgbench::training
