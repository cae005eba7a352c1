#include "sgbench/solver/dataset.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/solver/initial_condition.hpp"
#include "sgbench/solver/reference.hpp"

namespace sgbench::solver {
namespace {

constexpr std::array<char, 4> kMagic = {'S', 'G', 'P', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint64_t split_stream(Split split, std::uint64_t attempt) {
  return (static_cast<std::uint64_t>(split) << 32) | attempt;
}

}  // namespace

std::size_t DatasetConfig::split_size(Split split) const {
  switch (split) {
    case Split::Train: return n_train;
    case Split::Val: return n_val;
    case Split::Test: return n_test;
  }
  return 0;
}

DatasetConfig apply_regime(DatasetConfig config, Regime regime) {
  config.regime = regime;
  switch (regime) {
    case Regime::InDistribution: break;
    case Regime::ViscosityShift: config.system.nu = config.shifted_nu; break;
    case Regime::IcSpectrumShift: config.ic.decay_exponent = config.shifted_decay_exponent; break;
  }
  return config;
}

Trajectory solve_trajectory(const PdeSystem& system, const GridSpec& grid, const Field& u0,
                            const SolverSettings& settings) {
  Trajectory traj;
  traj.nx = grid.nx;
  traj.times.resize(grid.n_times);
  traj.values.resize(grid.n_times * grid.nx);
  Field u = u0;
  std::copy(u.begin(), u.end(), traj.values.begin());
  traj.times[0] = grid.time(0);
  for (std::size_t k = 1; k < grid.n_times; ++k) {
    u = evolve_reference(system, grid, u, grid.time(k) - grid.time(k - 1), settings);
    std::copy(u.begin(), u.end(), traj.values.begin() + static_cast<std::ptrdiff_t>(k * grid.nx));
    traj.times[k] = grid.time(k);
  }
  return traj;
}

Dataset generate_split(const DatasetConfig& config, Split split) {
  config.grid.validate();
  config.system.validate();
  config.ic.validate(config.grid);

  Dataset ds;
  ds.grid = config.grid;
  ds.system = config.system;
  ds.ic = config.ic;
  ds.solver = config.solver;
  ds.split = split;
  ds.regime = config.regime;

  const std::size_t n = config.split_size(split);
  ds.trajectories.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      const Field u0 = sample_initial_condition(config.ic, config.grid, i, split_stream(split, attempt));
      try {
        ds.trajectories.push_back(solve_trajectory(config.system, config.grid, u0, config.solver));
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFinite) throw;
        ++ds.rejections;
        log::warn("rejected non-finite trajectory " + std::to_string(i) + " (" +
                  std::string(to_string(split)) + ", attempt " + std::to_string(attempt) +
                  "); resampling");
        require(attempt < 64, ErrorKind::NonFinite, "generate_split: too many rejections");
      }
    }
  }
  return ds;
}

std::filesystem::path metadata_path_for(const std::filesystem::path& binary_path) {
  auto p = binary_path;
  p.replace_extension(".meta.json");
  return p;
}

std::vector<DatasetFiles> generate_dataset(const DatasetConfig& config,
                                           const std::filesystem::path& out_dir,
                                           const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorKind::Io, "cannot create " + out_dir.string());

  std::vector<DatasetFiles> files;
  for (Split split : {Split::Train, Split::Val, Split::Test}) {
    const Dataset ds = generate_split(config, split);
    DatasetFiles f;
    f.binary = out_dir / (name + "_" + std::string(to_string(split)) + ".sgpd");
    f.metadata = metadata_path_for(f.binary);
    write_dataset_binary(f.binary, ds);
    write_dataset_metadata(f.metadata, ds);
    files.push_back(f);
  }
  return files;
}

void write_dataset_binary(const std::filesystem::path& path, const Dataset& dataset) {
  const std::size_t n = dataset.size();
  const std::size_t t = dataset.grid.n_times;
  const std::size_t x = dataset.grid.nx;
  std::string bytes;
  bytes.reserve(kHeaderBytes + n * t * x * 8);
  bytes.append(kMagic.data(), kMagic.size());
  put_u32(bytes, kDatasetFormatVersion);
  put_u32(bytes, static_cast<std::uint32_t>(n));
  put_u32(bytes, static_cast<std::uint32_t>(t));
  put_u32(bytes, static_cast<std::uint32_t>(x));
  for (const auto& traj : dataset.trajectories) {
    require(traj.values.size() == t * x, ErrorKind::ShapeMismatch,
            "write_dataset_binary: trajectory shape differs from grid");
    for (double v : traj.values) put_f64(bytes, v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path.string());
}

RawArray read_dataset_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() >= kHeaderBytes, ErrorKind::Format, path.string() + ": truncated header");
  require(std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) == 0, ErrorKind::Format,
          path.string() + ": bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = get_u32(p + 4);
  require(version == kDatasetFormatVersion, ErrorKind::Format,
          path.string() + ": unsupported format version " + std::to_string(version));
  RawArray raw;
  raw.n = get_u32(p + 8);
  raw.t = get_u32(p + 12);
  raw.x = get_u32(p + 16);
  const std::size_t count = static_cast<std::size_t>(raw.n) * raw.t * raw.x;
  require(bytes.size() == kHeaderBytes + 8 * count, ErrorKind::Format,
          path.string() + ": payload length does not match header");
  raw.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) raw.values[i] = get_f64(p + kHeaderBytes + 8 * i);
  return raw;
}

void write_dataset_metadata(const std::filesystem::path& path, const Dataset& dataset) {
  nlohmann::json meta;
  meta["format_version"] = kDatasetFormatVersion;
  meta["system"] = {{"kind", to_string(dataset.system.kind)}, {"nu", dataset.system.nu}};
  meta["grid"] = {{"nx", dataset.grid.nx},
                  {"domain_length", dataset.grid.domain_length},
                  {"n_times", dataset.grid.n_times},
                  {"t_max", dataset.grid.t_max}};
  meta["ic"] = {{"n_modes", dataset.ic.n_modes},
                {"decay_exponent", dataset.ic.decay_exponent},
                {"amplitude_scale", dataset.ic.amplitude_scale}};
  meta["seed"] = dataset.ic.seed;
  meta["regime"] = to_string(dataset.regime);
  meta["split"] = to_string(dataset.split);
  meta["solver"] = {{"integrator", "rk4"},
                    {"spatial", "central2_periodic"},
                    {"safety", dataset.solver.safety}};
  meta["rejections"] = dataset.rejections;
  meta["shape"] = {dataset.size(), dataset.grid.n_times, dataset.grid.nx};
  std::vector<double> times;
  for (std::size_t k = 0; k < dataset.grid.n_times; ++k) times.push_back(dataset.grid.time(k));
  meta["times"] = times;

  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << meta.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& binary_path) {
  const auto meta_path = metadata_path_for(binary_path);
  std::ifstream in(meta_path);
  require(static_cast<bool>(in), ErrorKind::Io, "missing sidecar " + meta_path.string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, meta_path.string() + ": " + e.what());
  }

  Dataset ds;
  try {
    require(meta.at("format_version").get<std::uint32_t>() == kDatasetFormatVersion,
            ErrorKind::Format, meta_path.string() + ": unsupported metadata version");
    ds.system.kind = parse_pde_kind(meta.at("system").at("kind").get<std::string>());
    ds.system.nu = meta.at("system").at("nu").get<double>();
    const auto& g = meta.at("grid");
    ds.grid.nx = g.at("nx").get<std::size_t>();
    ds.grid.domain_length = g.at("domain_length").get<double>();
    ds.grid.n_times = g.at("n_times").get<std::size_t>();
    ds.grid.t_max = g.at("t_max").get<double>();
    const auto& ic = meta.at("ic");
    ds.ic.n_modes = ic.at("n_modes").get<std::size_t>();
    ds.ic.decay_exponent = ic.at("decay_exponent").get<double>();
    ds.ic.amplitude_scale = ic.at("amplitude_scale").get<double>();
    ds.ic.seed = meta.at("seed").get<std::uint64_t>();
    ds.regime = parse_regime(meta.at("regime").get<std::string>());
    ds.split = parse_split(meta.at("split").get<std::string>());
    ds.solver.safety = meta.at("solver").at("safety").get<double>();
    ds.rejections = meta.at("rejections").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, meta_path.string() + ": " + e.what());
  }

  const RawArray raw = read_dataset_binary(binary_path);
  require(raw.t == ds.grid.n_times && raw.x == ds.grid.nx, ErrorKind::Format,
          binary_path.string() + ": binary shape disagrees with sidecar");
  const std::size_t per = static_cast<std::size_t>(raw.t) * raw.x;
  ds.trajectories.resize(raw.n);
  for (std::size_t i = 0; i < raw.n; ++i) {
    auto& traj = ds.trajectories[i];
    traj.nx = raw.x;
    traj.values.assign(raw.values.begin() + static_cast<std::ptrdiff_t>(i * per),
                       raw.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
    traj.times.resize(raw.t);
    for (std::size_t k = 0; k < raw.t; ++k) traj.times[k] = ds.grid.time(k);
    traj.finite = all_finite(traj.values);
  }
  return ds;
}

}  // namespace sgbench::solver
