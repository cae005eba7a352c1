#pragma once

#include "sgbench/core/simulator.hpp"
#include "sgbench/solver/reference.hpp"

namespace sgbench::diagnostics {

/// G(u, dt) = u. Perfectly semigroup-consistent and wrong for any non-trivial dynamics.
class IdentitySimulator final : public Simulator {
public:
  std::vector<Field> advance_batch(std::span<const Field> states,
                                   std::span<const double> dts) const override;
};

/// G(u, dt) = u + dt^power * c for a fixed field c.
/// power = 1 is an additive semigroup; other powers are not.
class PowerDriftSimulator final : public Simulator {
public:
  PowerDriftSimulator(Field drift, double power);

  std::vector<Field> advance_batch(std::span<const Field> states,
                                   std::span<const double> dts) const override;

private:
  Field drift_;
  double power_;
};

}  // namespace sgbench::diagnostics
