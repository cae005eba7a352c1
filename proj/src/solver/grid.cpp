#include "sgbench/solver/grid.hpp"

#include <cmath>

#include "sgbench/core/error.hpp"

namespace sgbench::solver {

void GridSpec::validate() const {
  require(nx >= 4, ErrorKind::InvalidArgument, "grid: nx must be at least 4");
  require(n_times >= 2, ErrorKind::InvalidArgument, "grid: n_times must be at least 2");
  require(domain_length > 0.0 && std::isfinite(domain_length), ErrorKind::InvalidArgument,
          "grid: domain_length must be positive");
  require(t_max > 0.0 && std::isfinite(t_max), ErrorKind::InvalidArgument,
          "grid: t_max must be positive");
}

void PdeSystem::validate() const {
  require(nu > 0.0 && std::isfinite(nu), ErrorKind::InvalidArgument,
          "pde: viscosity must be positive");
}

void IcSpec::validate(const GridSpec& grid) const {
  require(n_modes >= 1, ErrorKind::InvalidArgument, "ic: n_modes must be >= 1");
  require(2 * n_modes < grid.nx, ErrorKind::InvalidArgument,
          "ic: n_modes must be below nx/2 to avoid aliasing");
  require(decay_exponent >= 0.0, ErrorKind::InvalidArgument, "ic: decay_exponent must be >= 0");
  require(amplitude_scale > 0.0, ErrorKind::InvalidArgument, "ic: amplitude_scale must be > 0");
}

std::string_view to_string(PdeKind kind) {
  return kind == PdeKind::Heat ? "heat" : "burgers";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::InDistribution: return "in_dist";
    case Regime::ViscosityShift: return "nu_shift";
    case Regime::IcSpectrumShift: return "ic_shift";
  }
  return "?";
}

PdeKind parse_pde_kind(std::string_view name) {
  if (name == "heat") return PdeKind::Heat;
  if (name == "burgers") return PdeKind::Burgers;
  fail(ErrorKind::Config, "unknown pde kind '" + std::string(name) + "'");
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  fail(ErrorKind::Config, "unknown split '" + std::string(name) + "'");
}

Regime parse_regime(std::string_view name) {
  if (name == "in_dist") return Regime::InDistribution;
  if (name == "nu_shift") return Regime::ViscosityShift;
  if (name == "ic_shift") return Regime::IcSpectrumShift;
  fail(ErrorKind::Config, "unknown regime '" + std::string(name) + "'");
}

}  // namespace sgbench::solver
