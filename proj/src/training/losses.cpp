#include "sgbench/training/losses.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"
#include "sgbench/tensor/ops.hpp"

namespace sgbench::training {

using tensor::Tensor;
using tensor::Var;

namespace {

// dx * sum / B == (dx * X) * mean over all B*X entries.
Var batch_mean_sq_norm(Var diff, double dx) {
  const double per_row = static_cast<double>(diff.shape().back());
  return tensor::scale(tensor::mean_sq(diff), dx * per_row);
}

void check_finite_loss(Var loss, const char* what) {
  require(std::isfinite(loss.value()[0]), ErrorKind::NonFinite, std::string(what) + " is not finite");
}

}  // namespace

Var stack_fields(tensor::Tape& tape, std::span<const Field> fields) {
  require(!fields.empty(), ErrorKind::ShapeMismatch, "stack_fields: empty batch");
  const std::size_t nx = fields.front().size();
  Tensor t({fields.size(), nx});
  for (std::size_t b = 0; b < fields.size(); ++b) {
    require(fields[b].size() == nx, ErrorKind::ShapeMismatch, "stack_fields: ragged batch");
    std::copy(fields[b].begin(), fields[b].end(), t.data() + b * nx);
  }
  return tape.constant(std::move(t));
}

Var loss_pred(tensor::Tape& tape, const DifferentiableMap& model, const PredBatch& batch, double dx) {
  const Var u = stack_fields(tape, batch.u);
  const Var target = stack_fields(tape, batch.target);
  const Var loss = batch_mean_sq_norm(tensor::sub(model(u, batch.t), target), dx);
  check_finite_loss(loss, "prediction loss");
  return loss;
}

Var loss_sg(tensor::Tape& tape, const DifferentiableMap& model, const SgBatch& batch, double dx) {
  require(batch.s.size() == batch.size() && batch.t.size() == batch.size(), ErrorKind::ShapeMismatch,
          "loss_sg: ragged batch");
  std::vector<double> total(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) total[b] = batch.s[b] + batch.t[b];
  const Var u = stack_fields(tape, batch.u);
  const Var composed = model(model(u, batch.s), batch.t);
  const Var direct = model(u, total);
  const Var loss = batch_mean_sq_norm(tensor::sub(composed, direct), dx);
  check_finite_loss(loss, "semigroup loss");
  return loss;
}

double loss_pred_value(const Simulator& model, const PredBatch& batch, double dx) {
  const auto pred = model.advance_batch(batch.u, batch.t);
  double acc = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < pred[b].size(); ++j) {
      const double d = pred[b][j] - batch.target[b][j];
      sq += d * d;
    }
    acc += dx * sq;
  }
  return acc / static_cast<double>(batch.size());
}

}  // namespace sgbench::training
