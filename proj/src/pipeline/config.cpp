#include "sgbench/pipeline/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "sgbench/core/error.hpp"
#include "sgbench/models/checkpoint.hpp"
#include "sgbench/pipeline/hashing.hpp"

namespace sgbench::pipeline {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), ErrorKind::Config, where + ": expected an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    require(names.contains(key), ErrorKind::Config, where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json optimizer_json(const tensor::AdamWConfig& o) {
  return {{"lr", o.lr},   {"beta1", o.beta1},
          {"beta2", o.beta2}, {"eps", o.eps},
          {"weight_decay", o.weight_decay}, {"clip", o.clip}};
}

json model_json(const models::ModelConfig& m) {
  return {{"width", m.width},         {"depth", m.depth},         {"kernel_size", m.kernel_size},
          {"n_modes", m.n_modes},     {"embed_dim", m.embed_dim}, {"max_period", m.max_period}};
}

void read_model(const json& j, models::ModelConfig& m, const std::string& where) {
  check_keys(j, {"width", "depth", "kernel_size", "n_modes", "embed_dim", "max_period"}, where);
  read(j, "width", m.width);
  read(j, "depth", m.depth);
  read(j, "kernel_size", m.kernel_size);
  read(j, "n_modes", m.n_modes);
  read(j, "embed_dim", m.embed_dim);
  read(j, "max_period", m.max_period);
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.systems = {{solver::PdeKind::Heat, 0.05, 0.03}, {solver::PdeKind::Burgers, 0.02, 0.03}};
  c.regimes = {solver::Regime::InDistribution, solver::Regime::ViscosityShift,
               solver::Regime::IcSpectrumShift};
  c.families = {models::Family::TcConv, models::Family::Fno1d};
  c.variants = {{"baseline", 0.0}, {"sg", 0.01}};
  return c;
}

void ExperimentConfig::validate() const {
  grid.validate();
  require(!systems.empty() && !regimes.empty() && !families.empty() && !variants.empty(),
          ErrorKind::Config, "config: systems, regimes, families and variants must be non-empty");
  std::set<solver::PdeKind> kinds;
  for (const auto& s : systems) {
    require(kinds.insert(s.kind).second, ErrorKind::Config, "config: duplicate system");
    require(s.nu > 0.0 && s.shifted_nu > 0.0, ErrorKind::Config, "config: viscosity must be > 0");
  }
  std::set<std::string> names;
  for (const auto& v : variants) {
    require(!v.name.empty() && v.name.find_first_of("-@, \"") == std::string::npos,
            ErrorKind::Config, "config: variant names must be non-empty without '-', '@', ',', quotes or spaces");
    require(names.insert(v.name).second, ErrorKind::Config, "config: duplicate variant " + v.name);
    require(v.lambda_sg >= 0.0, ErrorKind::Config, "config: lambda_sg must be >= 0");
  }
  require(std::set(regimes.begin(), regimes.end()).size() == regimes.size(), ErrorKind::Config,
          "config: duplicate regime");
  require(std::set(families.begin(), families.end()).size() == families.size(), ErrorKind::Config,
          "config: duplicate family");
  require(std::find(regimes.begin(), regimes.end(), solver::Regime::InDistribution) != regimes.end(),
          ErrorKind::Config, "config: the in-distribution regime is required");
  require(n_seeds >= 1, ErrorKind::Config, "config: need at least one seed");
  require(data.n_train >= 1 && data.n_val >= 1 && data.n_test >= 1, ErrorKind::Config,
          "config: every split needs at least one trajectory");
  data.ic.validate(grid);
  require(data.shifted_decay_exponent >= 0.0, ErrorKind::Config,
          "config: shifted decay exponent must be >= 0");
  require(data.solver.safety > 0.0 && data.solver.safety <= 1.0, ErrorKind::Config,
          "config: solver safety must lie in (0, 1]");
  for (auto family : families) model_config(family, 0).validate();
  require(training.epochs >= 1 && training.batch_size >= 1 && training.sg_batch_size >= 1,
          ErrorKind::Config, "config: epochs and batch sizes must be >= 1");
  require(training.optimizer.lr > 0.0, ErrorKind::Config, "config: learning rate must be > 0");
  diag_config().validate(grid);
  require(analysis.n_resamples >= 1 && analysis.level > 0.0 && analysis.level < 1.0,
          ErrorKind::Config, "config: invalid analysis settings");
}

const SystemSpec& ExperimentConfig::system(solver::PdeKind kind) const {
  for (const auto& s : systems) {
    if (s.kind == kind) return s;
  }
  fail(ErrorKind::Config, "config: system " + std::string(solver::to_string(kind)) + " not configured");
}

const VariantSpec& ExperimentConfig::variant(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  fail(ErrorKind::Config, "config: variant " + name + " not configured");
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n_seeds; ++i) out.push_back(seed_offset + i);
  return out;
}

solver::DatasetConfig ExperimentConfig::dataset_config(const SystemSpec& s,
                                                       solver::Regime regime) const {
  solver::DatasetConfig d;
  d.grid = grid;
  d.system = {s.kind, s.nu};
  d.ic = data.ic;
  d.ic.seed = data.seed;
  d.solver = data.solver;
  d.n_train = data.n_train;
  d.n_val = data.n_val;
  d.n_test = data.n_test;
  d.shifted_nu = s.shifted_nu;
  d.shifted_decay_exponent = data.shifted_decay_exponent;
  return solver::apply_regime(d, regime);
}

models::ModelConfig ExperimentConfig::model_config(models::Family family, std::uint64_t seed) const {
  models::ModelConfig m = family == models::Family::TcConv ? tc_conv : fno1d;
  m.family = family;
  m.nx = grid.nx;
  m.t_max = grid.t_max;
  m.seed = seed;
  return m;
}

training::TrainConfig ExperimentConfig::train_config(const VariantSpec& v, std::uint64_t seed) const {
  training::TrainConfig t = training;
  t.lambda_sg = v.lambda_sg;
  t.seed = seed;
  t.policy.max_fraction = diagnostics.seen_fraction;
  return t;
}

diagnostics::DiagConfig ExperimentConfig::diag_config() const {
  auto d = diagnostics::DiagConfig::grid_pairs(grid, diagnostics.seen_fraction);
  d.epsilon = diagnostics.epsilon;
  d.rollout_dt = diagnostics.rollout_dt;
  d.anchor_seed = diagnostics.anchor_seed;
  return d;
}

json to_json(const ExperimentConfig& c) {
  json systems = json::array();
  for (const auto& s : c.systems) {
    systems.push_back({{"kind", solver::to_string(s.kind)}, {"nu", s.nu}, {"shifted_nu", s.shifted_nu}});
  }
  json regimes = json::array();
  for (auto r : c.regimes) regimes.push_back(solver::to_string(r));
  json families = json::array();
  for (auto f : c.families) families.push_back(models::to_string(f));
  json variants = json::array();
  for (const auto& v : c.variants) variants.push_back({{"name", v.name}, {"lambda_sg", v.lambda_sg}});
  const auto& t = c.training;
  return {
      {"name", c.name},
      {"grid",
       {{"nx", c.grid.nx}, {"domain_length", c.grid.domain_length},
        {"n_times", c.grid.n_times}, {"t_max", c.grid.t_max}}},
      {"systems", systems},
      {"data",
       {{"seed", c.data.seed},
        {"n_train", c.data.n_train},
        {"n_val", c.data.n_val},
        {"n_test", c.data.n_test},
        {"ic",
         {{"n_modes", c.data.ic.n_modes},
          {"decay_exponent", c.data.ic.decay_exponent},
          {"amplitude_scale", c.data.ic.amplitude_scale}}},
        {"shifted_decay_exponent", c.data.shifted_decay_exponent},
        {"solver_safety", c.data.solver.safety}}},
      {"regimes", regimes},
      {"families", families},
      {"models", {{"tc_conv", model_json(c.tc_conv)}, {"fno1d", model_json(c.fno1d)}}},
      {"variants", variants},
      {"seeds", {{"count", c.n_seeds}, {"offset", c.seed_offset}}},
      {"training",
       {{"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"sg_batch_size", t.sg_batch_size},
        {"val_pairs_per_trajectory", t.val_pairs_per_trajectory},
        {"optimizer", optimizer_json(t.optimizer)}}},
      {"diagnostics",
       {{"epsilon", c.diagnostics.epsilon},
        {"rollout_dt", c.diagnostics.rollout_dt},
        {"seen_fraction", c.diagnostics.seen_fraction},
        {"anchor_seed", c.diagnostics.anchor_seed}}},
      {"analysis",
       {{"n_resamples", c.analysis.n_resamples},
        {"level", c.analysis.level},
        {"seed", c.analysis.seed}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = ExperimentConfig::defaults();
  try {
    check_keys(j, {"name", "grid", "systems", "data", "regimes", "families", "models", "variants",
                   "seeds", "training", "diagnostics", "analysis"},
               "config");
    read(j, "name", c.name);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      check_keys(g, {"nx", "domain_length", "n_times", "t_max"}, "grid");
      read(g, "nx", c.grid.nx);
      read(g, "domain_length", c.grid.domain_length);
      read(g, "n_times", c.grid.n_times);
      read(g, "t_max", c.grid.t_max);
    }
    if (j.contains("systems")) {
      c.systems.clear();
      for (const auto& s : j.at("systems")) {
        check_keys(s, {"kind", "nu", "shifted_nu"}, "systems[]");
        SystemSpec spec;
        spec.kind = solver::parse_pde_kind(s.at("kind").get<std::string>());
        spec.nu = s.at("nu").get<double>();
        read(s, "shifted_nu", spec.shifted_nu);
        c.systems.push_back(spec);
      }
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      check_keys(d, {"seed", "n_train", "n_val", "n_test", "ic", "shifted_decay_exponent",
                     "solver_safety"},
                 "data");
      read(d, "seed", c.data.seed);
      read(d, "n_train", c.data.n_train);
      read(d, "n_val", c.data.n_val);
      read(d, "n_test", c.data.n_test);
      read(d, "shifted_decay_exponent", c.data.shifted_decay_exponent);
      read(d, "solver_safety", c.data.solver.safety);
      if (d.contains("ic")) {
        const auto& ic = d.at("ic");
        check_keys(ic, {"n_modes", "decay_exponent", "amplitude_scale"}, "data.ic");
        read(ic, "n_modes", c.data.ic.n_modes);
        read(ic, "decay_exponent", c.data.ic.decay_exponent);
        read(ic, "amplitude_scale", c.data.ic.amplitude_scale);
      }
    }
    if (j.contains("regimes")) {
      c.regimes.clear();
      for (const auto& r : j.at("regimes")) c.regimes.push_back(solver::parse_regime(r.get<std::string>()));
    }
    if (j.contains("families")) {
      c.families.clear();
      for (const auto& f : j.at("families")) c.families.push_back(models::parse_family(f.get<std::string>()));
    }
    if (j.contains("models")) {
      const auto& m = j.at("models");
      check_keys(m, {"tc_conv", "fno1d"}, "models");
      if (m.contains("tc_conv")) read_model(m.at("tc_conv"), c.tc_conv, "models.tc_conv");
      if (m.contains("fno1d")) read_model(m.at("fno1d"), c.fno1d, "models.fno1d");
    }
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j.at("variants")) {
        check_keys(v, {"name", "lambda_sg"}, "variants[]");
        c.variants.push_back({v.at("name").get<std::string>(), v.at("lambda_sg").get<double>()});
      }
    }
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      check_keys(s, {"count", "offset"}, "seeds");
      read(s, "count", c.n_seeds);
      read(s, "offset", c.seed_offset);
    }
    if (j.contains("training")) {
      const auto& t = j.at("training");
      check_keys(t, {"epochs", "batch_size", "sg_batch_size", "val_pairs_per_trajectory", "optimizer"},
                 "training");
      read(t, "epochs", c.training.epochs);
      read(t, "batch_size", c.training.batch_size);
      read(t, "sg_batch_size", c.training.sg_batch_size);
      read(t, "val_pairs_per_trajectory", c.training.val_pairs_per_trajectory);
      if (t.contains("optimizer")) {
        const auto& o = t.at("optimizer");
        check_keys(o, {"lr", "beta1", "beta2", "eps", "weight_decay", "clip"}, "training.optimizer");
        auto& opt = c.training.optimizer;
        read(o, "lr", opt.lr);
        read(o, "beta1", opt.beta1);
        read(o, "beta2", opt.beta2);
        read(o, "eps", opt.eps);
        read(o, "weight_decay", opt.weight_decay);
        read(o, "clip", opt.clip);
      }
    }
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      check_keys(d, {"epsilon", "rollout_dt", "seen_fraction", "anchor_seed"}, "diagnostics");
      read(d, "epsilon", c.diagnostics.epsilon);
      read(d, "rollout_dt", c.diagnostics.rollout_dt);
      read(d, "seen_fraction", c.diagnostics.seen_fraction);
      read(d, "anchor_seed", c.diagnostics.anchor_seed);
    }
    if (j.contains("analysis")) {
      const auto& a = j.at("analysis");
      check_keys(a, {"n_resamples", "level", "seed"}, "analysis");
      read(a, "n_resamples", c.analysis.n_resamples);
      read(a, "level", c.analysis.level);
      read(a, "seed", c.analysis.seed);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
  require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path.string());
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(to_json(config).dump());
}

std::string run_id(const ExperimentConfig& config) {
  return "sgb-" + config_hash(config).substr(0, 12);
}

}  // namespace sgbench::pipeline
