#include "sgbench/solver/initial_condition.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "sgbench/core/error.hpp"

namespace sgbench::solver {

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Field fourier_series_field(std::span<const double> amplitudes, std::span<const double> phases,
                           const GridSpec& grid, double amplitude_scale) {
  require(amplitudes.size() == phases.size(), ErrorKind::InvalidArgument,
          "fourier_series_field: amplitudes and phases differ in length");
  require(!amplitudes.empty(), ErrorKind::InvalidArgument, "fourier_series_field: no modes");
  require(2 * amplitudes.size() < grid.nx, ErrorKind::InvalidArgument,
          "fourier_series_field: n_modes must be below nx/2");

  Field u(grid.nx, 0.0);
  const double k0 = 2.0 * std::numbers::pi / grid.domain_length;
  for (std::size_t j = 0; j < grid.nx; ++j) {
    const double x = grid.x(j);
    double acc = 0.0;
    for (std::size_t m = 1; m <= amplitudes.size(); ++m) {
      acc += amplitudes[m - 1] * std::sin(k0 * static_cast<double>(m) * x + phases[m - 1]);
    }
    u[j] = acc;
  }
  const double peak = max_abs(u);
  require(peak > 0.0, ErrorKind::InvalidArgument, "fourier_series_field: degenerate zero field");
  const double c = amplitude_scale / peak;
  for (double& v : u) v *= c;
  return u;
}

Field sample_initial_condition(const IcSpec& ic, const GridSpec& grid,
                               std::uint64_t trajectory_index, std::uint64_t stream) {
  ic.validate(grid);
  auto rng = trajectory_rng(ic.seed, trajectory_index, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<double> amplitudes(ic.n_modes);
  std::vector<double> phases(ic.n_modes);
  for (std::size_t m = 1; m <= ic.n_modes; ++m) {
    const double sigma = std::pow(static_cast<double>(m), -ic.decay_exponent);
    amplitudes[m - 1] = sigma * normal(rng);
    phases[m - 1] = phase(rng);
  }
  return fourier_series_field(amplitudes, phases, grid, ic.amplitude_scale);
}

}  // namespace sgbench::solver
