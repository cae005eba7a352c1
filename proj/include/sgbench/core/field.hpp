#pragma once

#include <span>
#include <vector>

namespace sgbench {

/// Real field sampled on a periodic 1D grid.
using Field = std::vector<double>;

/// Quadrature-weighted L2 norm: sqrt(dx * sum v_j^2).
double l2_norm(std::span<const double> v, double dx);

/// Weighted L2 norm of (a - b).
double l2_distance(std::span<const double> a, std::span<const double> b, double dx);

double mean(std::span<const double> v);
double max_abs(std::span<const double> v);
bool all_finite(std::span<const double> v);

}  // namespace sgbench
