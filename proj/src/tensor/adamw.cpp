#include "sgbench/tensor/adamw.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"

namespace sgbench::tensor {

double clip_global_norm(std::span<Tensor> grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.values()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Tensor& g : grads) {
      for (double& v : g.values()) v *= s;
    }
  }
  return norm;
}

AdamW::AdamW(AdamWConfig config, std::span<const Tensor> params) : config_(config) {
  for (const Tensor& p : params) {
    m_.emplace_back(p.shape(), 0.0);
    v_.emplace_back(p.shape(), 0.0);
  }
}

StepOutcome AdamW::step(std::span<Tensor> params, std::vector<Tensor> grads) {
  require(params.size() == m_.size() && grads.size() == m_.size(), ErrorKind::ShapeMismatch,
          "AdamW::step: parameter/gradient count differs from optimizer state");
  for (std::size_t p = 0; p < params.size(); ++p) {
    require(params[p].shape() == m_[p].shape() && grads[p].shape() == m_[p].shape(),
            ErrorKind::ShapeMismatch, "AdamW::step: shape mismatch for parameter " + std::to_string(p));
  }

  StepOutcome outcome;
  outcome.grad_norm = clip_global_norm(grads, config_.clip);
  if (!std::isfinite(outcome.grad_norm)) {
    log::warn("AdamW: non-finite gradient norm; step skipped");
    return outcome;
  }
  if (config_.clip > 0.0 && outcome.grad_norm > config_.clip) {
    outcome.clip_scale = config_.clip / outcome.grad_norm;
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  const double decay = 1.0 - config_.lr * config_.weight_decay;
  for (std::size_t p = 0; p < params.size(); ++p) {
    double* w = params[p].data();
    double* m = m_[p].data();
    double* v = v_[p].data();
    const double* g = grads[p].data();
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] = w[i] * decay - config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
  outcome.applied = true;
  return outcome;
}

}  // namespace sgbench::tensor
