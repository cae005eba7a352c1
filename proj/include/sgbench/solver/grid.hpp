#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace sgbench::solver {

/// Periodic spatial grid plus the uniformly spaced saved times.
struct GridSpec {
  std::size_t nx = 128;
  double domain_length = 1.0;
  std::size_t n_times = 21;
  double t_max = 1.0;

  double dx() const { return domain_length / static_cast<double>(nx); }
  double x(std::size_t j) const { return static_cast<double>(j) * dx(); }
  /// Spacing between saved times.
  double saved_dt() const { return t_max / static_cast<double>(n_times - 1); }
  double time(std::size_t k) const {
    return static_cast<double>(k) * t_max / static_cast<double>(n_times - 1);
  }

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

enum class PdeKind { Heat, Burgers };

struct PdeSystem {
  PdeKind kind = PdeKind::Heat;
  double nu = 0.05;

  void validate() const;
  bool operator==(const PdeSystem&) const = default;
};

/// Random Fourier-series initial conditions with decaying amplitudes.
struct IcSpec {
  std::size_t n_modes = 8;
  double decay_exponent = 2.0;
  double amplitude_scale = 1.0;
  std::uint64_t seed = 0;

  void validate(const GridSpec& grid) const;
  bool operator==(const IcSpec&) const = default;
};

struct SolverSettings {
  /// Fraction of the explicit diffusive limit dx^2/(2 nu) used as internal step.
  double safety = 0.25;

  bool operator==(const SolverSettings&) const = default;
};

enum class Split { Train, Val, Test };
enum class Regime { InDistribution, ViscosityShift, IcSpectrumShift };

std::string_view to_string(PdeKind kind);
std::string_view to_string(Split split);
std::string_view to_string(Regime regime);

PdeKind parse_pde_kind(std::string_view name);
Split parse_split(std::string_view name);
Regime parse_regime(std::string_view name);

}  // namespace sgbench::solver
