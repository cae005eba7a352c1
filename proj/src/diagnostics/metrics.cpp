#include "sgbench/diagnostics/metrics.hpp"

#include <cmath>
#include <limits>

#include "sgbench/core/error.hpp"

namespace sgbench::diagnostics {
namespace {

double composition_discrepancy(const Field& composed, const Field& direct, double eps, double dx) {
  if (!all_finite(composed) || !all_finite(direct)) return std::numeric_limits<double>::quiet_NaN();
  return rel_l2(composed, direct, eps, dx);
}

}  // namespace

double rel_l2(std::span<const double> a, std::span<const double> b, double eps, double dx) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch, "rel_l2: length mismatch");
  return l2_distance(a, b, dx) / (l2_norm(b, dx) + eps);
}

double semigroup_error(const Simulator& model, const Field& u, double s, double t, double eps,
                       double dx) {
  require(s > 0.0 && t > 0.0, ErrorKind::InvalidArgument, "semigroup_error: s and t must be > 0");
  const Field inner = model.advance(u, s);
  const Field composed = model.advance(inner, t);
  const Field direct = model.advance(u, s + t);
  return composition_discrepancy(composed, direct, eps, dx);
}

EvolutionMap autonomous_family(const Simulator& model) {
  return [&model](const Field& u, double r, double t) { return model.advance(u, t - r); };
}

double evolution_family_error(const EvolutionMap& model, const Field& u, double r, double s,
                              double t, double eps, double dx) {
  require(r <= s && s <= t, ErrorKind::InvalidArgument, "evolution_family_error: need r <= s <= t");
  const Field inner = model(u, r, s);
  const Field composed = model(inner, s, t);
  const Field direct = model(u, r, t);
  return composition_discrepancy(composed, direct, eps, dx);
}

}  // namespace sgbench::diagnostics
