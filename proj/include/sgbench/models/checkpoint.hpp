#pragma once

#include <filesystem>

#include <json.hpp>

#include "sgbench/models/simulator_model.hpp"

namespace sgbench::models {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointPaths {
  std::filesystem::path manifest;  // <base>.ckpt.json
  std::filesystem::path blob;      // <base>.ckpt.bin
};

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

CheckpointPaths checkpoint_paths(const std::filesystem::path& base);

/// Writes the JSON manifest (family, config, parameter table with shapes and
/// byte offsets) and the float64 little-endian blob.
CheckpointPaths save_checkpoint(const SimulatorModel& model, const std::filesystem::path& base);

/// Accepts either the base path or the manifest path. Throws Format on version,
/// table or blob-length mismatches and Io on missing files.
SimulatorModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sgbench::models
