#include "sgbench/diagnostics/reference_models.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"

namespace sgbench::diagnostics {

std::vector<Field> IdentitySimulator::advance_batch(std::span<const Field> states,
                                                    std::span<const double> dts) const {
  require(states.size() == dts.size(), ErrorKind::ShapeMismatch, "identity: batch size mismatch");
  return {states.begin(), states.end()};
}

PowerDriftSimulator::PowerDriftSimulator(Field drift, double power)
    : drift_(std::move(drift)), power_(power) {}

std::vector<Field> PowerDriftSimulator::advance_batch(std::span<const Field> states,
                                                      std::span<const double> dts) const {
  require(states.size() == dts.size(), ErrorKind::ShapeMismatch, "drift: batch size mismatch");
  std::vector<Field> out(states.begin(), states.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(out[i].size() == drift_.size(), ErrorKind::ShapeMismatch, "drift: field size mismatch");
    const double w = std::pow(dts[i], power_);
    for (std::size_t j = 0; j < drift_.size(); ++j) out[i][j] += w * drift_[j];
  }
  return out;
}

}  // namespace sgbench::diagnostics
