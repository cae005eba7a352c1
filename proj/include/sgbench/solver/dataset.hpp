#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgbench/core/field.hpp"
#include "sgbench/solver/grid.hpp"

namespace sgbench::solver {

/// Row-major [n_times, nx] samples of one solution.
struct Trajectory {
  std::vector<double> values;
  std::vector<double> times;
  std::size_t nx = 0;
  bool finite = true;

  std::size_t n_times() const { return times.size(); }
  std::span<const double> at(std::size_t k) const { return {values.data() + k * nx, nx}; }
  Field state(std::size_t k) const {
    const auto s = at(k);
    return {s.begin(), s.end()};
  }
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  GridSpec grid;
  PdeSystem system;
  IcSpec ic;
  SolverSettings solver;
  Split split = Split::Train;
  Regime regime = Regime::InDistribution;
  std::size_t rejections = 0;

  std::size_t size() const { return trajectories.size(); }
};

/// Everything needed to regenerate one (system, regime) family of splits.
struct DatasetConfig {
  GridSpec grid;
  PdeSystem system;
  IcSpec ic;
  SolverSettings solver;
  Regime regime = Regime::InDistribution;
  std::size_t n_train = 128;
  std::size_t n_val = 32;
  std::size_t n_test = 64;
  double shifted_nu = 0.03;
  double shifted_decay_exponent = 1.0;

  std::size_t split_size(Split split) const;
};

/// Applies the regime's evaluation-time shift to the base configuration:
/// ViscosityShift sets nu = shifted_nu, IcSpectrumShift lowers the IC decay exponent.
DatasetConfig apply_regime(DatasetConfig config, Regime regime);

/// Chains S_dt between saved times starting at u0; values[0] is u0 exactly.
/// Throws NonFinite if any saved state is not finite.
Trajectory solve_trajectory(const PdeSystem& system, const GridSpec& grid, const Field& u0,
                            const SolverSettings& settings = {});

/// Builds one split. Each trajectory draws from its own stream keyed by
/// (ic.seed, index, split, attempt); non-finite solutions are resampled.
Dataset generate_split(const DatasetConfig& config, Split split);

struct DatasetFiles {
  std::filesystem::path binary;
  std::filesystem::path metadata;
};

/// Writes all three splits as `<name>_<split>.sgpd` with `.meta.json` sidecars.
std::vector<DatasetFiles> generate_dataset(const DatasetConfig& config,
                                           const std::filesystem::path& out_dir,
                                           const std::string& name);

/// Binary layout: "SGPD", u32 version, u32 N, u32 T, u32 X, then N*T*X float64,
/// all little endian, in [trajectory][time][space] order.
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

struct RawArray {
  std::uint32_t n = 0, t = 0, x = 0;
  std::vector<double> values;
};

void write_dataset_binary(const std::filesystem::path& path, const Dataset& dataset);
RawArray read_dataset_binary(const std::filesystem::path& path);

void write_dataset_metadata(const std::filesystem::path& path, const Dataset& dataset);

/// Reads a binary file and its sidecar (`<stem>.meta.json`).
Dataset load_dataset(const std::filesystem::path& binary_path);

std::filesystem::path metadata_path_for(const std::filesystem::path& binary_path);

}  // namespace sgbench::solver
