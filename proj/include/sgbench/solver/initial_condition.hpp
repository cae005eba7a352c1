#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "sgbench/core/field.hpp"
#include "sgbench/solver/grid.hpp"

namespace sgbench::solver {

/// Independent generator for one trajectory, keyed by (seed, index, stream).
/// The stream word separates splits and resample attempts.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0);

/// c * sum_m a_m sin(2 pi m x / L + phi_m), with c chosen so max|u| == amplitude_scale.
/// amplitudes[m-1] and phases[m-1] belong to mode m.
Field fourier_series_field(std::span<const double> amplitudes, std::span<const double> phases,
                           const GridSpec& grid, double amplitude_scale);

/// a_m ~ Normal(0, m^-decay_exponent) (standard deviation), phi_m ~ U[0, 2 pi).
Field sample_initial_condition(const IcSpec& ic, const GridSpec& grid,
                               std::uint64_t trajectory_index, std::uint64_t stream = 0);

}  // namespace sgbench::solver
