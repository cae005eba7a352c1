#include "sgbench/core/field.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"

namespace sgbench {

double l2_norm(std::span<const double> v, double dx) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(dx * acc);
}

double l2_distance(std::span<const double> a, std::span<const double> b, double dx) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch, "l2_distance: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(dx * acc);
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace sgbench
