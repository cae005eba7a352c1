#include "sgbench/solver/reference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sgbench/core/error.hpp"

namespace sgbench::solver {
namespace {

// u <- u + dt * (k1 + 2 k2 + 2 k3 + k4) / 6, stages evaluated in place.
struct Rk4Workspace {
  explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
  Field k1, k2, k3, k4, tmp;
};

void rk4_step(const PdeSystem& system, const GridSpec& grid, Field& u, double dt,
              Rk4Workspace& w) {
  const std::size_t n = u.size();
  evaluate_rhs(system, grid, u, w.k1);
  for (std::size_t j = 0; j < n; ++j) w.tmp[j] = u[j] + 0.5 * dt * w.k1[j];
  evaluate_rhs(system, grid, w.tmp, w.k2);
  for (std::size_t j = 0; j < n; ++j) w.tmp[j] = u[j] + 0.5 * dt * w.k2[j];
  evaluate_rhs(system, grid, w.tmp, w.k3);
  for (std::size_t j = 0; j < n; ++j) w.tmp[j] = u[j] + dt * w.k3[j];
  evaluate_rhs(system, grid, w.tmp, w.k4);
  const double c = dt / 6.0;
  for (std::size_t j = 0; j < n; ++j) {
    u[j] += c * (w.k1[j] + 2.0 * w.k2[j] + 2.0 * w.k3[j] + w.k4[j]);
  }
}

void check_finite(const Field& u, const char* where) {
  if (!all_finite(u)) fail(ErrorKind::NonFinite, std::string(where) + ": non-finite state");
}

}  // namespace

double internal_dt_limit(const PdeSystem& system, const GridSpec& grid, std::span<const double> u,
                         const SolverSettings& settings) {
  const double dx = grid.dx();
  double limit = settings.safety * dx * dx / (2.0 * system.nu);
  if (system.kind == PdeKind::Burgers) {
    const double peak = max_abs(u);
    if (peak > 0.0) limit = std::min(limit, dx / (2.0 * peak));
  }
  return limit;
}

void evaluate_rhs(const PdeSystem& system, const GridSpec& grid, std::span<const double> u,
                  std::span<double> out) {
  const std::size_t n = u.size();
  const double dx = grid.dx();
  const double diff = system.nu / (dx * dx);
  const double adv = 1.0 / (2.0 * dx);
  const bool burgers = system.kind == PdeKind::Burgers;
  for (std::size_t j = 0; j < n; ++j) {
    const double left = u[j == 0 ? n - 1 : j - 1];
    const double right = u[j + 1 == n ? 0 : j + 1];
    double v = diff * (right - 2.0 * u[j] + left);
    if (burgers) v -= u[j] * (right - left) * adv;
    out[j] = v;
  }
}

Field step_reference(const PdeSystem& system, const GridSpec& grid, const Field& u, double dt,
                     const SolverSettings& settings) {
  require(u.size() == grid.nx, ErrorKind::ShapeMismatch, "step_reference: state length != nx");
  require(dt > 0.0, ErrorKind::InvalidArgument, "step_reference: dt must be positive");
  const double limit = internal_dt_limit(system, grid, u, settings);
  require(dt <= limit * (1.0 + 1e-12), ErrorKind::InvalidArgument,
          "step_reference: dt exceeds stability limit " + std::to_string(limit));
  Field out = u;
  Rk4Workspace w(u.size());
  rk4_step(system, grid, out, dt, w);
  check_finite(out, "step_reference");
  return out;
}

Field evolve_reference(const PdeSystem& system, const GridSpec& grid, const Field& u0, double t,
                       const SolverSettings& settings) {
  require(u0.size() == grid.nx, ErrorKind::ShapeMismatch, "evolve_reference: state length != nx");
  require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidArgument,
          "evolve_reference: elapsed time must be >= 0");
  if (t == 0.0) return u0;
  check_finite(u0, "evolve_reference");

  const double limit = internal_dt_limit(system, grid, u0, settings);
  const auto steps = static_cast<std::size_t>(std::ceil(t / limit));
  const double dt = t / static_cast<double>(std::max<std::size_t>(steps, 1));

  Field u = u0;
  Rk4Workspace w(u.size());
  for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
    rk4_step(system, grid, u, dt, w);
  }
  check_finite(u, "evolve_reference");
  return u;
}

ReferenceSimulator::ReferenceSimulator(PdeSystem system, GridSpec grid, SolverSettings settings)
    : system_(system), grid_(grid), settings_(settings) {}

std::vector<Field> ReferenceSimulator::advance_batch(std::span<const Field> states,
                                                     std::span<const double> dts) const {
  require(states.size() == dts.size(), ErrorKind::ShapeMismatch,
          "ReferenceSimulator: states and dts differ in length");
  std::vector<Field> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    try {
      out.push_back(evolve_reference(system_, grid_, states[i], dts[i], settings_));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFinite) throw;
      out.emplace_back(states[i].size(), std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace sgbench::solver
