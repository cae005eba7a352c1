#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgbench/tensor/tensor.hpp"

namespace sgbench::tensor {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  /// Global-norm clipping threshold; <= 0 disables clipping.
  double clip = 1.0;
};

struct StepOutcome {
  bool applied = false;
  double grad_norm = 0.0;
  double clip_scale = 1.0;
};

/// Scales grads in place so their global L2 norm is at most max_norm.
/// Returns the pre-clipping norm.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

/// Adam with decoupled weight decay and bias correction.
class AdamW {
public:
  AdamW(AdamWConfig config, std::span<const Tensor> params);

  /// Clips, then updates params in place. A non-finite gradient skips the
  /// step (nothing changes, step count stays put) and logs a warning.
  StepOutcome step(std::span<Tensor> params, std::vector<Tensor> grads);

  std::uint64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

private:
  AdamWConfig config_;
  std::vector<Tensor> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace sgbench::tensor
