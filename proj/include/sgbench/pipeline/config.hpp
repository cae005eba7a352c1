#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbench/diagnostics/evaluate.hpp"
#include "sgbench/models/simulator_model.hpp"
#include "sgbench/solver/dataset.hpp"
#include "sgbench/training/trainer.hpp"

namespace sgbench::pipeline {

struct SystemSpec {
  solver::PdeKind kind = solver::PdeKind::Heat;
  double nu = 0.05;
  /// Viscosity used by the viscosity-shift test regime.
  double shifted_nu = 0.03;
};

struct VariantSpec {
  std::string name;
  double lambda_sg = 0.0;
};

struct DataSection {
  std::uint64_t seed = 0;
  std::size_t n_train = 128;
  std::size_t n_val = 32;
  std::size_t n_test = 64;
  solver::IcSpec ic;
  double shifted_decay_exponent = 1.0;
  solver::SolverSettings solver;
};

struct AnalysisSection {
  std::size_t n_resamples = 2000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct DiagSection {
  double epsilon = 1e-8;
  double rollout_dt = 0.05;
  double seen_fraction = 0.5;
  std::uint64_t anchor_seed = 0;
};

/// Everything needed to re-run the experiment grid.
struct ExperimentConfig {
  std::string name = "sgbench";
  solver::GridSpec grid;
  std::vector<SystemSpec> systems;
  DataSection data;
  std::vector<solver::Regime> regimes;
  std::vector<models::Family> families;
  models::ModelConfig tc_conv = models::ModelConfig::tc_conv();
  models::ModelConfig fno1d = models::ModelConfig::fno1d();
  std::vector<VariantSpec> variants;
  std::size_t n_seeds = 5;
  std::uint64_t seed_offset = 0;
  training::TrainConfig training;
  DiagSection diagnostics;
  AnalysisSection analysis;

  /// Two systems, three regimes, two families, two variants, five seeds.
  static ExperimentConfig defaults();

  void validate() const;

  const SystemSpec& system(solver::PdeKind kind) const;
  const VariantSpec& variant(const std::string& name) const;
  std::vector<std::uint64_t> seeds() const;

  solver::DatasetConfig dataset_config(const SystemSpec& system, solver::Regime regime) const;
  models::ModelConfig model_config(models::Family family, std::uint64_t seed) const;
  training::TrainConfig train_config(const VariantSpec& variant, std::uint64_t seed) const;
  diagnostics::DiagConfig diag_config() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// SHA-256 of the canonical (sorted-key, compact) JSON serialization.
std::string config_hash(const ExperimentConfig& config);

/// "sgb-" followed by the first 12 hex digits of the config hash.
std::string run_id(const ExperimentConfig& config);

}  // namespace sgbench::pipeline
