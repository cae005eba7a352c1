#pragma once

#include <functional>
#include <span>

#include "sgbench/core/field.hpp"
#include "sgbench/core/simulator.hpp"

namespace sgbench::diagnostics {

inline constexpr double kDefaultEpsilon = 1e-8;

/// ||a - b|| / (||b|| + eps) with the quadrature-weighted norm.
double rel_l2(std::span<const double> a, std::span<const double> b, double eps, double dx);

/// ||G(G(u, s), t) - G(u, s + t)|| / (||G(u, s + t)|| + eps).
/// Uses only model evaluations; returns NaN if any model output is non-finite.
double semigroup_error(const Simulator& model, const Field& u, double s, double t, double eps,
                       double dx);

/// Two-time evolution map M(u, r, t) ~ S(t, r) u.
using EvolutionMap = std::function<Field(const Field& u, double r, double t)>;

/// Wraps an autonomous simulator as M(u, r, t) = G(u, t - r).
EvolutionMap autonomous_family(const Simulator& model);

/// ||M(M(u, r, s), s, t) - M(u, r, t)|| / (||M(u, r, t)|| + eps) for r <= s <= t.
/// For autonomous_family(G) this is semigroup_error(G, u, s - r, t - s, ...)
/// whenever (s - r) + (t - s) == t - r in floating point.
double evolution_family_error(const EvolutionMap& model, const Field& u, double r, double s,
                              double t, double eps, double dx);

}  // namespace sgbench::diagnostics
