#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "sgbench/core/error.hpp"
#include "sgbench/tensor/adamw.hpp"
#include "sgbench/tensor/ops.hpp"
#include "support/autodiff_suite.hpp"
#include "support/oracles.hpp"

using namespace sgbench;
using namespace sgbench::tensor;
using sgbench::testing::random_tensor;

TEST_CASE("tensor basics") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(shape_string(t.shape()) == "[2, 3]");
  const Tensor r = t.reshaped({3, 2});
  CHECK(r.dim(0) == 3);
  CHECK_THROWS_AS(t.reshaped({4, 2}), Error);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1.0}), Error);
  CHECK(element_count({}) == 1);
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  const Var a = tape.parameter(Tensor({2}, 1.0));
  CHECK_THROWS_AS(tape.backward(a), Error);
}

TEST_CASE("gradient accumulates across shared uses") {
  Tape tape;
  const Var a = tape.parameter(Tensor::from({3.0}));
  // d/da mean_sq(a + a) = 2 * (2a) * 2 = 8a
  const Var loss = mean_sq(add(a, a));
  tape.backward(loss);
  CHECK(tape.grad(a)[0] == doctest::Approx(24.0));
}

TEST_CASE("detached constants receive no gradient") {
  Tape tape;
  const Var a = tape.parameter(Tensor::from({1.0, 2.0}));
  const Var c = tape.constant(Tensor::from({5.0, 5.0}));
  tape.backward(mean_sq(mul(a, c)));
  CHECK(tape.grad(c)[0] == 0.0);
  CHECK(tape.grad(a)[0] == doctest::Approx(25.0));
}

TEST_CASE("gelu matches the tanh formula") {
  Tape tape(false);
  std::vector<double> xs;
  for (int i = -60; i <= 60; ++i) xs.push_back(0.25 * i);
  xs.push_back(40.0);
  xs.push_back(-40.0);
  const Var x = tape.constant(Tensor({xs.size()}, xs));
  const Var y = gelu(x);
  const double c = std::sqrt(2.0 / std::numbers::pi);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = xs[i];
    const double ref = 0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v)));
    CHECK(y.value()[i] == doctest::Approx(ref).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("periodic conv matches the triple loop") {
  CHECK(sgbench::testing::conv_oracle_error() <= sgbench::testing::kConvOracleTol);
}

TEST_CASE("periodic conv accepts an unbatched input") {
  std::mt19937_64 rng(12);
  const Tensor x = random_tensor({2, 8}, rng);
  const Tensor w = random_tensor({3, 2, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  Tape tape(false);
  const Var y = conv1d_periodic(tape.constant(x), tape.constant(w), tape.constant(b));
  CHECK(y.shape() == Shape{3, 8});
  const Tensor ref = sgbench::testing::naive_conv1d(x.reshaped({1, 2, 8}), w, b);
  CHECK(sgbench::testing::max_abs_diff(y.value().values(), ref.values()) <= 1e-12);
}

TEST_CASE("periodic conv rejects bad kernels") {
  Tape tape(false);
  const Var x = tape.constant(Tensor({1, 2, 8}));
  CHECK_THROWS_AS(conv1d_periodic(x, tape.constant(Tensor({3, 2, 4})), tape.constant(Tensor({3}))),
                  Error);
  CHECK_THROWS_AS(conv1d_periodic(x, tape.constant(Tensor({3, 1, 3})), tape.constant(Tensor({3}))),
                  Error);
  CHECK_THROWS_AS(conv1d_periodic(x, tape.constant(Tensor({3, 2, 3})), tape.constant(Tensor({2}))),
                  Error);
}

TEST_CASE("spectral conv matches the complex DFT oracle") {
  CHECK(sgbench::testing::spectral_oracle_error() <= sgbench::testing::kSpectralOracleTol);
}

TEST_CASE("spectral conv with identity weights low-passes") {
  // One channel, weight 1 + 0i on every retained mode: output is the input
  // with modes >= M removed.
  const std::size_t X = 32, M = 4;
  Tensor x({1, 1, X});
  for (std::size_t j = 0; j < X; ++j) {
    const double p = 2.0 * std::numbers::pi * j / X;
    x[j] = 0.3 + std::sin(p) + 0.5 * std::cos(3 * p) + 0.7 * std::sin(9 * p);
  }
  Tensor w({1, 1, M, 2});
  for (std::size_t k = 0; k < M; ++k) w[2 * k] = 1.0;
  Tape tape(false);
  const Var y = spectral_conv1d(tape.constant(x), tape.constant(w));
  for (std::size_t j = 0; j < X; ++j) {
    const double p = 2.0 * std::numbers::pi * j / X;
    CHECK(y.value()[j] == doctest::Approx(0.3 + std::sin(p) + 0.5 * std::cos(3 * p)).epsilon(1e-12));
  }
}

TEST_CASE("spectral conv rejects too many modes") {
  Tape tape(false);
  const Var x = tape.constant(Tensor({1, 1, 8}));
  CHECK_THROWS_AS(spectral_conv1d(x, tape.constant(Tensor({1, 1, 6, 2}))), Error);
  CHECK_NOTHROW(spectral_conv1d(x, tape.constant(Tensor({1, 1, 5, 2}))));
}

TEST_CASE("finite-difference gradients of every op") {
  for (const auto& r : sgbench::testing::op_gradient_suite()) {
    INFO(r.name);
    CHECK(r.instances == sgbench::testing::kGradInstances);
    CHECK(r.nondegenerate);
    CHECK(r.max_rel_error <= sgbench::testing::kGradTol);
  }
}

TEST_CASE("shape mismatches throw") {
  Tape tape(false);
  const Var a = tape.constant(Tensor({2, 3}));
  const Var b = tape.constant(Tensor({3, 2}));
  CHECK_THROWS_AS(add(a, b), Error);
  CHECK_THROWS_AS(mul(a, b), Error);
  CHECK_THROWS_AS(slice_channels(tape.constant(Tensor({1, 2, 4})), 1, 3), Error);
  Tape other(false);
  CHECK_THROWS_AS(add(a, other.constant(Tensor({2, 3}))), Error);
}

TEST_CASE("global norm clipping") {
  std::vector<Tensor> g{Tensor::from({3.0}), Tensor::from({4.0})};
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(g[0][0] == doctest::Approx(0.6));
  CHECK(g[1][0] == doctest::Approx(0.8));
  std::vector<Tensor> small{Tensor::from({0.3})};
  clip_global_norm(small, 1.0);
  CHECK(small[0][0] == 0.3);
}

TEST_CASE("adamw matches a hand-rolled update") {
  AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.1;
  cfg.clip = 0.0;
  std::vector<Tensor> params{Tensor::from({1.0, -2.0})};
  AdamW opt(cfg, params);
  double m[2] = {0, 0}, v[2] = {0, 0}, w[2] = {1.0, -2.0};
  const double grads[3][2] = {{0.5, -1.0}, {0.1, 0.2}, {-0.3, 0.4}};
  for (int step = 1; step <= 3; ++step) {
    opt.step(params, {Tensor::from({grads[step - 1][0], grads[step - 1][1]})});
    for (int i = 0; i < 2; ++i) {
      const double g = grads[step - 1][i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, step));
      const double vh = v[i] / (1 - std::pow(0.999, step));
      w[i] = w[i] - 0.01 * 0.1 * w[i] - 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(params[0][i] == doctest::Approx(w[i]).epsilon(1e-14));
    }
  }
  CHECK(opt.step_count() == 3);
}

TEST_CASE("adamw skips non-finite gradients") {
  std::vector<Tensor> params{Tensor::from({1.0})};
  AdamW opt({}, params);
  const auto out = opt.step(params, {Tensor::from({std::nan("")})});
  CHECK_FALSE(out.applied);
  CHECK(params[0][0] == 1.0);
  CHECK(opt.step_count() == 0);
}

TEST_CASE("adamw clips before the moment update") {
  AdamWConfig cfg;
  cfg.clip = 1.0;
  cfg.weight_decay = 0.0;
  std::vector<Tensor> params{Tensor::from({0.0, 0.0})};
  AdamW opt(cfg, params);
  const auto out = opt.step(params, {Tensor::from({30.0, 40.0})});
  CHECK(out.applied);
  CHECK(out.grad_norm == doctest::Approx(50.0));
  CHECK(out.clip_scale == doctest::Approx(0.02));
  CHECK(opt.first_moments()[0][0] == doctest::Approx(0.1 * 0.6));
}
