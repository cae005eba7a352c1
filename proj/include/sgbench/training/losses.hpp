#pragma once

#include <functional>
#include <span>

#include "sgbench/core/simulator.hpp"
#include "sgbench/tensor/tape.hpp"
#include "sgbench/training/sampling.hpp"

namespace sgbench::training {

/// Differentiable G(u, dt) on a tape: u is [B, X], one dt per row.
using DifferentiableMap = std::function<tensor::Var(tensor::Var u, std::span<const double> dts)>;

/// Stacks fields into a [B, X] constant on the tape.
tensor::Var stack_fields(tensor::Tape& tape, std::span<const Field> fields);

/// Mean over the batch of ||G(u, t) - S_t u||^2 with ||v||^2 = dx * sum v_j^2.
/// Throws NonFinite for a non-finite loss.
tensor::Var loss_pred(tensor::Tape& tape, const DifferentiableMap& model, const PredBatch& batch,
                      double dx);

/// Mean over the batch of ||G(G(u, s), t) - G(u, s + t)||^2. Gradients flow
/// through the inner composition and the direct branch.
tensor::Var loss_sg(tensor::Tape& tape, const DifferentiableMap& model, const SgBatch& batch,
                    double dx);

/// loss_pred evaluated without a tape (validation).
double loss_pred_value(const Simulator& model, const PredBatch& batch, double dx);

}  // namespace sgbench::training
