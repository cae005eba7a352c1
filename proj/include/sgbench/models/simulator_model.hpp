#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgbench/core/simulator.hpp"
#include "sgbench/models/time_embedding.hpp"
#include "sgbench/tensor/tape.hpp"

namespace sgbench::models {

enum class Family { TcConv, Fno1d };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

struct ModelConfig {
  Family family = Family::TcConv;
  std::size_t width = 64;
  std::size_t depth = 4;
  std::size_t kernel_size = 5;  // TcConv only
  std::size_t n_modes = 16;     // Fno1d only
  std::size_t embed_dim = 32;
  double max_period = 100.0;
  std::size_t nx = 128;
  /// Horizon used to normalize increments: tau = dt / t_max.
  double t_max = 1.0;
  std::uint64_t seed = 0;

  static ModelConfig tc_conv();
  static ModelConfig fno1d();

  void validate() const;
  TimeEmbedding embedding() const { return {embed_dim, max_period}; }
  bool operator==(const ModelConfig&) const = default;
};

struct ParamSpec {
  std::string name;
  tensor::Shape shape;
};

/// Ordered parameter table; a pure function of the config.
std::vector<ParamSpec> parameter_specs(const ModelConfig& config);

/// Time-conditioned residual simulator G(u, dt) = u + F(u, embed(dt / t_max)).
///
/// TcConv body: 1x1 lift, then `depth` residual blocks
///   h += conv(gelu(conv(h) + A_b e)), then 1x1 projection to one channel.
/// Fno1d body: 1x1 lift, then `depth` blocks
///   h = gelu(spectral(h) + pointwise(h) + A_b e), then 1x1 projection.
/// A_b e is a per-block affine map of the time embedding added per channel.
/// The final projection starts at zero, so a fresh model is the identity map.
class SimulatorModel final : public Simulator {
public:
  explicit SimulatorModel(ModelConfig config);
  SimulatorModel(ModelConfig config, std::vector<tensor::Tensor> parameters);

  const ModelConfig& config() const { return config_; }
  const std::vector<ParamSpec>& specs() const { return specs_; }
  std::vector<tensor::Tensor>& parameters() { return params_; }
  const std::vector<tensor::Tensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  /// Index into parameters() by name; throws InvalidArgument if absent.
  std::size_t parameter_index(std::string_view name) const;

  /// Parameters registered on a tape, callable as a differentiable map.
  class Bound {
  public:
    /// u: [B, X]; dts: B increments. Returns [B, X].
    tensor::Var operator()(tensor::Var u, std::span<const double> dts) const;
    const std::vector<tensor::Var>& params() const { return params_; }

  private:
    friend class SimulatorModel;
    Bound(const SimulatorModel* model, tensor::Tape* tape, std::vector<tensor::Var> params)
        : model_(model), tape_(tape), params_(std::move(params)) {}
    const SimulatorModel* model_;
    tensor::Tape* tape_;
    std::vector<tensor::Var> params_;
  };

  Bound bind(tensor::Tape& tape) const;

  /// Inference in chunks; non-finite outputs are returned as computed.
  std::vector<Field> advance_batch(std::span<const Field> states,
                                   std::span<const double> dts) const override;

  /// Single evaluation; throws NonFinite if the output is not finite.
  Field predict(const Field& u, double dt) const;

  void zero_final_projection();

  static constexpr std::size_t kInferenceChunk = 64;

private:
  tensor::Var forward(tensor::Tape& tape, std::span<const tensor::Var> params, tensor::Var u,
                      std::span<const double> dts) const;

  ModelConfig config_;
  std::vector<ParamSpec> specs_;
  std::vector<tensor::Tensor> params_;
};

}  // namespace sgbench::models
