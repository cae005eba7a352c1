#include "sgbench/models/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <json.hpp>

#include "sgbench/core/error.hpp"

namespace sgbench::models {

nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"family", to_string(c.family)}, {"width", c.width},         {"depth", c.depth},
          {"kernel_size", c.kernel_size},  {"n_modes", c.n_modes},     {"embed_dim", c.embed_dim},
          {"max_period", c.max_period},    {"nx", c.nx},               {"t_max", c.t_max},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.family = parse_family(j.at("family").get<std::string>());
  c.width = j.at("width").get<std::size_t>();
  c.depth = j.at("depth").get<std::size_t>();
  c.kernel_size = j.at("kernel_size").get<std::size_t>();
  c.n_modes = j.at("n_modes").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.max_period = j.at("max_period").get<double>();
  c.nx = j.at("nx").get<std::size_t>();
  c.t_max = j.at("t_max").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

namespace {

std::filesystem::path strip_suffix(const std::filesystem::path& p, std::string_view suffix) {
  const std::string s = p.string();
  if (s.size() > suffix.size() && s.ends_with(suffix)) {
    return s.substr(0, s.size() - suffix.size());
  }
  return p;
}

}  // namespace

CheckpointPaths checkpoint_paths(const std::filesystem::path& base) {
  auto b = strip_suffix(strip_suffix(base, ".ckpt.json"), ".ckpt.bin");
  return {b.string() + ".ckpt.json", b.string() + ".ckpt.bin"};
}

CheckpointPaths save_checkpoint(const SimulatorModel& model, const std::filesystem::path& base) {
  const CheckpointPaths paths = checkpoint_paths(base);
  nlohmann::json table = nlohmann::json::array();
  std::string blob;
  blob.reserve(model.parameter_count() * 8);
  for (std::size_t i = 0; i < model.specs().size(); ++i) {
    const auto& spec = model.specs()[i];
    const auto& t = model.parameters()[i];
    table.push_back({{"name", spec.name}, {"shape", spec.shape}, {"offset", blob.size()},
                     {"count", t.size()}});
    for (double v : t.values()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
  }
  nlohmann::json manifest = {{"format_version", kCheckpointFormatVersion},
                             {"family", to_string(model.config().family)},
                             {"config", model_config_to_json(model.config())},
                             {"parameters", table},
                             {"blob", {{"file", paths.blob.filename().string()}, {"bytes", blob.size()}}}};

  std::ofstream bin(paths.blob, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(bin), ErrorKind::Io, "cannot write " + paths.blob.string());
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  require(static_cast<bool>(bin), ErrorKind::Io, "write failed for " + paths.blob.string());

  std::ofstream js(paths.manifest, std::ios::trunc);
  require(static_cast<bool>(js), ErrorKind::Io, "cannot write " + paths.manifest.string());
  js << manifest.dump(2) << '\n';
  return paths;
}

SimulatorModel load_checkpoint(const std::filesystem::path& path) {
  const CheckpointPaths paths = checkpoint_paths(path);
  std::ifstream js(paths.manifest);
  require(static_cast<bool>(js), ErrorKind::Io, "cannot open " + paths.manifest.string());

  ModelConfig config;
  std::vector<std::tuple<std::string, tensor::Shape, std::size_t, std::size_t>> table;
  std::size_t blob_bytes = 0;
  try {
    nlohmann::json manifest;
    js >> manifest;
    const int version = manifest.at("format_version").get<int>();
    require(version == kCheckpointFormatVersion, ErrorKind::Format,
            paths.manifest.string() + ": unsupported checkpoint version " + std::to_string(version));
    config = model_config_from_json(manifest.at("config"));
    require(manifest.at("family").get<std::string>() == to_string(config.family), ErrorKind::Format,
            paths.manifest.string() + ": family disagrees with config");
    for (const auto& row : manifest.at("parameters")) {
      table.emplace_back(row.at("name").get<std::string>(), row.at("shape").get<tensor::Shape>(),
                         row.at("offset").get<std::size_t>(), row.at("count").get<std::size_t>());
    }
    blob_bytes = manifest.at("blob").at("bytes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, paths.manifest.string() + ": " + e.what());
  }

  const auto specs = parameter_specs(config);
  require(specs.size() == table.size(), ErrorKind::Format,
          paths.manifest.string() + ": parameter table does not match config");
  std::size_t expected_offset = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& [name, shape, offset, count] = table[i];
    require(name == specs[i].name && shape == specs[i].shape &&
                count == tensor::element_count(shape) && offset == expected_offset,
            ErrorKind::Format, paths.manifest.string() + ": bad table entry for " + name);
    expected_offset += 8 * count;
  }
  require(expected_offset == blob_bytes, ErrorKind::Format,
          paths.manifest.string() + ": blob size disagrees with parameter table");

  std::ifstream bin(paths.blob, std::ios::binary);
  require(static_cast<bool>(bin), ErrorKind::Io, "cannot open " + paths.blob.string());
  const std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  require(blob.size() == blob_bytes, ErrorKind::Format,
          paths.blob.string() + ": expected " + std::to_string(blob_bytes) + " bytes, found " +
              std::to_string(blob.size()));

  std::vector<tensor::Tensor> params;
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    tensor::Tensor t(specs[i].shape);
    const std::size_t offset = std::get<2>(table[i]);
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[offset + 8 * k + b]) << (8 * b);
      t[k] = std::bit_cast<double>(bits);
    }
    params.push_back(std::move(t));
  }
  return SimulatorModel(config, std::move(params));
}

}  // namespace sgbench::models
