#pragma once

#include <span>
#include <vector>

#include "sgbench/core/field.hpp"

namespace sgbench {

/// Anything that advances a state by an elapsed time: G(u, dt).
///
/// Diagnostics only see this interface, so a learned model, the identity
/// map and the wrapped reference solver are evaluated by the same code.
class Simulator {
public:
  virtual ~Simulator() = default;

  /// Advances states[i] by dts[i]. Outputs may contain non-finite values;
  /// callers decide how to account for them.
  virtual std::vector<Field> advance_batch(std::span<const Field> states,
                                           std::span<const double> dts) const = 0;

  Field advance(const Field& u, double dt) const;
};

}  // namespace sgbench
