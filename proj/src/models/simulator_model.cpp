#include "sgbench/models/simulator_model.hpp"

#include <cmath>
#include <random>

#include "sgbench/core/error.hpp"
#include "sgbench/tensor/ops.hpp"

namespace sgbench::models {

using tensor::Shape;
using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

std::string_view to_string(Family family) {
  return family == Family::TcConv ? "tc_conv" : "fno1d";
}

Family parse_family(std::string_view name) {
  if (name == "tc_conv") return Family::TcConv;
  if (name == "fno1d") return Family::Fno1d;
  fail(ErrorKind::Config, "unknown model family '" + std::string(name) + "'");
}

ModelConfig ModelConfig::tc_conv() {
  ModelConfig c;
  c.family = Family::TcConv;
  c.width = 64;
  c.depth = 4;
  c.kernel_size = 5;
  return c;
}

ModelConfig ModelConfig::fno1d() {
  ModelConfig c;
  c.family = Family::Fno1d;
  c.width = 32;
  c.depth = 4;
  c.n_modes = 16;
  return c;
}

void ModelConfig::validate() const {
  require(width >= 1 && depth >= 1, ErrorKind::InvalidArgument, "model: width and depth must be >= 1");
  require(nx >= 4, ErrorKind::InvalidArgument, "model: nx must be >= 4");
  require(t_max > 0.0, ErrorKind::InvalidArgument, "model: t_max must be > 0");
  embedding().validate();
  if (family == Family::TcConv) {
    require(kernel_size % 2 == 1 && kernel_size <= nx, ErrorKind::InvalidArgument,
            "model: kernel_size must be odd and <= nx");
  } else {
    require(n_modes >= 1 && n_modes <= nx / 2 + 1, ErrorKind::InvalidArgument,
            "model: n_modes must lie in [1, nx/2 + 1]");
  }
}

std::vector<ParamSpec> parameter_specs(const ModelConfig& c) {
  c.validate();
  const std::size_t w = c.width, e = c.embed_dim;
  std::vector<ParamSpec> specs;
  specs.push_back({"lift.weight", {w, 1}});
  specs.push_back({"lift.bias", {w}});
  for (std::size_t b = 0; b < c.depth; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    if (c.family == Family::TcConv) {
      specs.push_back({p + "conv1.weight", {w, w, c.kernel_size}});
      specs.push_back({p + "conv1.bias", {w}});
      specs.push_back({p + "time.weight", {w, e}});
      specs.push_back({p + "time.bias", {w}});
      specs.push_back({p + "conv2.weight", {w, w, c.kernel_size}});
      specs.push_back({p + "conv2.bias", {w}});
    } else {
      specs.push_back({p + "spectral.weight", {w, w, c.n_modes, 2}});
      specs.push_back({p + "pointwise.weight", {w, w}});
      specs.push_back({p + "pointwise.bias", {w}});
      specs.push_back({p + "time.weight", {w, e}});
      specs.push_back({p + "time.bias", {w}});
    }
  }
  specs.push_back({"proj.weight", {1, w}});
  specs.push_back({"proj.bias", {1}});
  return specs;
}

namespace {

// Inputs feeding each output unit; biases share their layer's fan-in.
std::size_t fan_in(const ModelConfig& c, const std::string& name) {
  if (name.starts_with("lift.")) return 1;
  if (name.find(".conv") != std::string::npos) return c.width * c.kernel_size;
  if (name.find(".time.") != std::string::npos) return c.embed_dim;
  return c.width;
}

std::vector<Tensor> initial_parameters(const ModelConfig& c, const std::vector<ParamSpec>& specs) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    0x6d6f6465u};
  std::mt19937_64 rng(seq);
  std::vector<Tensor> params;
  for (const auto& spec : specs) {
    Tensor t(spec.shape, 0.0);
    if (!spec.name.starts_with("proj.")) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in(c, spec.name)));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double& v : t.values()) v = dist(rng);
    }
    params.push_back(std::move(t));
  }
  return params;
}

}  // namespace

SimulatorModel::SimulatorModel(ModelConfig config)
    : config_(config), specs_(parameter_specs(config_)), params_(initial_parameters(config_, specs_)) {}

SimulatorModel::SimulatorModel(ModelConfig config, std::vector<Tensor> parameters)
    : config_(config), specs_(parameter_specs(config_)), params_(std::move(parameters)) {
  require(params_.size() == specs_.size(), ErrorKind::ShapeMismatch,
          "SimulatorModel: expected " + std::to_string(specs_.size()) + " parameter tensors");
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    require(params_[i].shape() == specs_[i].shape, ErrorKind::ShapeMismatch,
            "SimulatorModel: parameter " + specs_[i].name + " has shape " +
                tensor::shape_string(params_[i].shape()));
  }
}

std::size_t SimulatorModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

std::size_t SimulatorModel::parameter_index(std::string_view name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].name == name) return i;
  }
  fail(ErrorKind::InvalidArgument, "no parameter named '" + std::string(name) + "'");
}

void SimulatorModel::zero_final_projection() {
  params_[parameter_index("proj.weight")].fill(0.0);
  params_[parameter_index("proj.bias")].fill(0.0);
}

SimulatorModel::Bound SimulatorModel::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(tape.parameter(p));
  return Bound(this, &tape, std::move(vars));
}

Var SimulatorModel::Bound::operator()(Var u, std::span<const double> dts) const {
  return model_->forward(*tape_, params_, u, dts);
}

Var SimulatorModel::forward(Tape& tape, std::span<const Var> p, Var u,
                            std::span<const double> dts) const {
  const Shape& us = u.shape();
  require(us.size() == 2 && us[1] == config_.nx, ErrorKind::ShapeMismatch,
          "SimulatorModel: input must be [B, " + std::to_string(config_.nx) + "], got " +
              tensor::shape_string(us));
  const std::size_t batch = us[0];
  require(dts.size() == batch, ErrorKind::ShapeMismatch, "SimulatorModel: one dt per sample required");

  const TimeEmbedding embedding = config_.embedding();
  Tensor emb({batch, config_.embed_dim});
  for (std::size_t b = 0; b < batch; ++b) {
    embedding.embed_into(dts[b] / config_.t_max, emb.data() + b * config_.embed_dim);
  }
  const Var e = tape.constant(std::move(emb));

  std::size_t k = 0;
  auto next = [&]() { return p[k++]; };

  const Var u3 = tensor::reshape(u, {batch, 1, config_.nx});
  const Var lift_w = next();
  const Var lift_b = next();
  Var h = tensor::matmul_channels(u3, lift_w, lift_b);

  for (std::size_t blk = 0; blk < config_.depth; ++blk) {
    if (config_.family == Family::TcConv) {
      const Var c1w = next(), c1b = next(), tw = next(), tb = next(), c2w = next(), c2b = next();
      Var a = tensor::conv1d_periodic(h, c1w, c1b);
      a = tensor::add_channel_shift(a, tensor::linear(e, tw, tb));
      a = tensor::gelu(a);
      a = tensor::conv1d_periodic(a, c2w, c2b);
      h = tensor::add(h, a);
    } else {
      const Var sw = next(), pw = next(), pb = next(), tw = next(), tb = next();
      Var a = tensor::add(tensor::spectral_conv1d(h, sw), tensor::matmul_channels(h, pw, pb));
      a = tensor::add_channel_shift(a, tensor::linear(e, tw, tb));
      h = tensor::gelu(a);
    }
  }
  const Var proj_w = next();
  const Var proj_b = next();
  const Var update = tensor::matmul_channels(h, proj_w, proj_b);
  return tensor::add(u, tensor::reshape(update, {batch, config_.nx}));
}

std::vector<Field> SimulatorModel::advance_batch(std::span<const Field> states,
                                                 std::span<const double> dts) const {
  require(states.size() == dts.size(), ErrorKind::ShapeMismatch,
          "SimulatorModel: states and dts differ in length");
  std::vector<Field> out;
  out.reserve(states.size());
  const std::size_t nx = config_.nx;
  for (std::size_t start = 0; start < states.size(); start += kInferenceChunk) {
    const std::size_t n = std::min(kInferenceChunk, states.size() - start);
    Tensor input({n, nx});
    for (std::size_t i = 0; i < n; ++i) {
      require(states[start + i].size() == nx, ErrorKind::ShapeMismatch,
              "SimulatorModel: state length != nx");
      std::copy(states[start + i].begin(), states[start + i].end(), input.data() + i * nx);
    }
    Tape tape(false);
    const Bound bound = bind(tape);
    const Var y = bound(tape.constant(std::move(input)), dts.subspan(start, n));
    const Tensor& yv = y.value();
    for (std::size_t i = 0; i < n; ++i) {
      out.emplace_back(yv.data() + i * nx, yv.data() + (i + 1) * nx);
    }
  }
  return out;
}

Field SimulatorModel::predict(const Field& u, double dt) const {
  Field y = advance(u, dt);
  require(all_finite(y), ErrorKind::NonFinite, "SimulatorModel: non-finite prediction");
  return y;
}

}  // namespace sgbench::models
