#pragma once

// Gradient and kernel checks shared by the unit tests and the acceptance binary.

#include <functional>
#include <string>
#include <vector>

#include "sgbench/models/simulator_model.hpp"
#include "support/oracles.hpp"

namespace sgbench::testing {

inline constexpr int kGradInstances = 5;
inline constexpr double kGradTol = 1e-5;
inline constexpr double kSpectralOracleTol = 1e-10;
inline constexpr double kConvOracleTol = 1e-12;

struct NamedCheck {
  std::string name;
  /// Worst relative error over all instances.
  double max_rel_error = 0.0;
  int instances = 0;
  /// False if some instance had an all-zero analytic gradient.
  bool nondegenerate = true;
};

using OpFn = std::function<Var(const std::vector<Var>&)>;

inline NamedCheck grad_check_op(const std::string& name, const OpFn& op, const std::vector<Shape>& shapes,
                                double scale = 1.0) {
  NamedCheck out{name};
  for (int inst = 0; inst < kGradInstances; ++inst) {
    std::mt19937_64 rng(100 + inst);
    std::vector<Tensor> inputs;
    for (const auto& s : shapes) inputs.push_back(random_tensor(s, rng, scale));
    const auto seed = static_cast<std::uint64_t>(1000 + inst);
    const auto r = check_gradients([&](Tape& t, const std::vector<Var>& v) { return probe_loss(t, op(v), seed); },
                                   std::move(inputs));
    out.max_rel_error = std::max(out.max_rel_error, r.max_rel_error);
    out.nondegenerate = out.nondegenerate && r.n_entries > 0;
    ++out.instances;
  }
  return out;
}

/// Every differentiable op, five random instances each.
inline std::vector<NamedCheck> op_gradient_suite() {
  using namespace tensor;
  std::vector<NamedCheck> out;
  out.push_back(grad_check_op("add", [](const auto& v) { return add(v[0], v[1]); }, {{3, 4}, {3, 4}}));
  out.push_back(grad_check_op("sub", [](const auto& v) { return sub(v[0], v[1]); }, {{3, 4}, {3, 4}}));
  out.push_back(grad_check_op("mul", [](const auto& v) { return mul(v[0], v[1]); }, {{3, 4}, {3, 4}}));
  out.push_back(grad_check_op("scale", [](const auto& v) { return scale(v[0], -1.7); }, {{5}}));
  out.push_back(grad_check_op("gelu", [](const auto& v) { return gelu(v[0]); }, {{2, 3, 7}}, 2.0));
  out.push_back(grad_check_op("mean_sq", [](const auto& v) { return mean_sq(v[0]); }, {{4, 5}}));
  out.push_back(grad_check_op("reshape", [](const auto& v) { return reshape(v[0], {6, 2}); }, {{3, 4}}));
  out.push_back(grad_check_op("matmul_channels",
                              [](const auto& v) { return matmul_channels(v[0], v[1], v[2]); },
                              {{2, 3, 6}, {4, 3}, {4}}));
  out.push_back(grad_check_op("linear", [](const auto& v) { return linear(v[0], v[1], v[2]); },
                              {{3, 5}, {4, 5}, {4}}));
  out.push_back(grad_check_op("add_channel_shift",
                              [](const auto& v) { return add_channel_shift(v[0], v[1]); },
                              {{2, 3, 5}, {2, 3}}));
  out.push_back(grad_check_op("concat_channels", [](const auto& v) { return concat_channels(v[0], v[1]); },
                              {{2, 3, 5}, {2, 2, 5}}));
  out.push_back(grad_check_op("slice_channels", [](const auto& v) { return slice_channels(v[0], 1, 3); },
                              {{2, 4, 5}}));
  out.push_back(grad_check_op("conv1d_periodic",
                              [](const auto& v) { return conv1d_periodic(v[0], v[1], v[2]); },
                              {{2, 3, 9}, {4, 3, 5}, {4}}));
  out.push_back(grad_check_op("spectral_conv1d", [](const auto& v) { return spectral_conv1d(v[0], v[1]); },
                              {{2, 3, 12}, {2, 3, 7, 2}}));
  out.push_back(grad_check_op("spectral_conv1d odd length",
                              [](const auto& v) { return spectral_conv1d(v[0], v[1]); },
                              {{1, 2, 11}, {3, 2, 6, 2}}));
  return out;
}

inline models::ModelConfig small_model_config(models::Family family, std::uint64_t seed) {
  auto c = family == models::Family::TcConv ? models::ModelConfig::tc_conv() : models::ModelConfig::fno1d();
  c.width = 4;
  c.depth = 2;
  c.kernel_size = 3;
  c.n_modes = 4;
  c.embed_dim = 4;
  c.nx = 12;
  c.seed = seed;
  return c;
}

/// A model whose output actually depends on every parameter.
inline models::SimulatorModel randomized_model(const models::ModelConfig& c, std::uint64_t seed,
                                               double scale = 0.5) {
  models::SimulatorModel m(c);
  std::mt19937_64 rng(seed);
  for (auto& p : m.parameters()) p = random_tensor(p.shape(), rng, scale);
  return m;
}

/// mean_sq(G(u, dt) - c) for fixed u and c.
inline double model_loss(const models::SimulatorModel& m, const Tensor& u, const Tensor& c,
                         const std::vector<double>& dts) {
  Tape tape(false);
  const auto bound = m.bind(tape);
  const Var y = bound(tape.constant(u), dts);
  return tensor::mean_sq(tensor::sub(y, tape.constant(c))).value()[0];
}

/// Parameter gradients of a full model against central differences, five random instances.
inline NamedCheck model_gradient_check(models::Family family, double h = 1e-6) {
  NamedCheck out{std::string(models::to_string(family))};
  for (int inst = 0; inst < kGradInstances; ++inst) {
    auto m = randomized_model(small_model_config(family, inst), 50 + inst);
    std::mt19937_64 rng(70 + inst);
    const Tensor u = random_tensor({2, 12}, rng);
    const Tensor c = random_tensor({2, 12}, rng);
    const std::vector<double> dts{0.1 + 0.05 * inst, 0.35};

    std::vector<Tensor> analytic;
    {
      Tape tape;
      const auto bound = m.bind(tape);
      const Var loss = tensor::mean_sq(tensor::sub(bound(tape.constant(u), dts), tape.constant(c)));
      tape.backward(loss);
      for (const Var& p : bound.params()) analytic.push_back(tape.grad(p));
    }
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t p = 0; p < m.parameters().size(); ++p) {
      Tensor& param = m.parameters()[p];
      for (std::size_t e = 0; e < param.size(); ++e) {
        const double orig = param[e];
        param[e] = orig + h;
        const double up = model_loss(m, u, c, dts);
        param[e] = orig - h;
        const double down = model_loss(m, u, c, dts);
        param[e] = orig;
        const double numeric = (up - down) / (2.0 * h);
        diff += std::pow(numeric - analytic[p][e], 2);
        na += std::pow(analytic[p][e], 2);
        nn += std::pow(numeric, 2);
      }
    }
    out.nondegenerate = out.nondegenerate && na > 0.0;
    out.max_rel_error = std::max(out.max_rel_error, std::sqrt(diff) / std::sqrt(std::max(na, nn)));
    ++out.instances;
  }
  return out;
}

/// Worst |conv1d_periodic - triple loop| over kernel sizes 1, 3, 5, 7.
inline double conv_oracle_error() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (const std::size_t k : {1u, 3u, 5u, 7u}) {
    const Tensor x = random_tensor({3, 4, 16}, rng);
    const Tensor w = random_tensor({5, 4, k}, rng);
    const Tensor b = random_tensor({5}, rng);
    Tape tape(false);
    const Var y = tensor::conv1d_periodic(tape.constant(x), tape.constant(w), tape.constant(b));
    worst = std::max(worst, max_abs_diff(y.value().values(), naive_conv1d(x, w, b).values()));
  }
  return worst;
}

/// Worst |spectral_conv1d - complex DFT oracle| over even and odd lengths and mode counts.
inline double spectral_oracle_error() {
  std::mt19937_64 rng(21);
  struct Case {
    std::size_t x, m;
  };
  double worst = 0.0;
  for (const Case c : {Case{16, 1}, Case{16, 5}, Case{16, 9}, Case{15, 8}, Case{32, 16}}) {
    const Tensor x = random_tensor({2, 3, c.x}, rng);
    const Tensor w = random_tensor({4, 3, c.m, 2}, rng);
    Tape tape(false);
    const Var y = tensor::spectral_conv1d(tape.constant(x), tape.constant(w));
    worst = std::max(worst, max_abs_diff(y.value().values(), naive_spectral_conv1d(x, w).values()));
  }
  return worst;
}

}  // namespace sgbench::testing
