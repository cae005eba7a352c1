#pragma once

#include <span>

#include "sgbench/core/field.hpp"
#include "sgbench/core/simulator.hpp"
#include "sgbench/solver/grid.hpp"

namespace sgbench::solver {

/// Largest admissible internal RK4 step for state u:
/// safety * dx^2 / (2 nu), capped by dx / (2 max|u|) for Burgers.
double internal_dt_limit(const PdeSystem& system, const GridSpec& grid, std::span<const double> u,
                         const SolverSettings& settings = {});

/// Method-of-lines right-hand side with 2nd-order central periodic differences.
void evaluate_rhs(const PdeSystem& system, const GridSpec& grid, std::span<const double> u,
                  std::span<double> out);

/// One classical RK4 step of size dt. Throws NonFinite if the result is not finite
/// and InvalidArgument if dt exceeds the stability limit.
Field step_reference(const PdeSystem& system, const GridSpec& grid, const Field& u, double dt,
                     const SolverSettings& settings = {});

/// S_t u0: ceil(t / dt_limit) equal RK4 substeps reaching exactly t. S_0 is the identity.
Field evolve_reference(const PdeSystem& system, const GridSpec& grid, const Field& u0, double t,
                       const SolverSettings& settings = {});

/// The reference solver exposed as a Simulator: advance(u, dt) = S_dt u.
/// Non-finite results are returned as NaN-filled fields instead of throwing.
class ReferenceSimulator final : public Simulator {
public:
  ReferenceSimulator(PdeSystem system, GridSpec grid, SolverSettings settings = {});

  std::vector<Field> advance_batch(std::span<const Field> states,
                                   std::span<const double> dts) const override;

private:
  PdeSystem system_;
  GridSpec grid_;
  SolverSettings settings_;
};

}  // namespace sgbench::solver
