#pragma once

#include <cstddef>

#include "sgbench/tensor/tape.hpp"

// Differentiable operations. Channel ops take [B, C, X] or [C, X] (a batch of
// one); the output keeps the input's rank. Shape errors throw ShapeMismatch.
namespace sgbench::tensor {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
/// Elementwise product.
Var mul(Var a, Var b);
/// GELU, tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Var gelu(Var a);
/// Mean of squares over every element; returns shape [1].
Var mean_sq(Var a);
Var reshape(Var a, Shape shape);

/// 1x1 convolution: out[b, o, j] = sum_i w[o, i] x[b, i, j] + bias[o].
Var matmul_channels(Var x, Var weight, Var bias);
/// Dense layer on rows: [B, E] x [C, E]^T + [C] -> [B, C].
Var linear(Var x, Var weight, Var bias);
/// Adds shift[b, c] to every spatial sample of channel c: [B, C, X] + [B, C].
Var add_channel_shift(Var x, Var shift);
Var concat_channels(Var a, Var b);
/// Channels [begin, end).
Var slice_channels(Var a, std::size_t begin, std::size_t end);

/// Periodic cross-correlation with odd kernel width K:
/// out[b, o, j] = bias[o] + sum_{i,k} w[o, i, k] x[b, i, (j + k - K/2) mod X].
Var conv1d_periodic(Var x, Var weight, Var bias);

/// Truncated Fourier layer. weight has shape [C_out, C_in, M, 2] holding the
/// real and imaginary parts of M retained non-negative-frequency modes, M <= X/2 + 1.
/// Real DFT -> per-mode complex channel mixing -> inverse real DFT with modes >= M zeroed.
/// The inverse follows the usual half-spectrum convention: imaginary parts of the
/// DC and (even X) Nyquist coefficients are ignored.
Var spectral_conv1d(Var x, Var weight);

namespace detail {

struct BatchDims {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t length = 1;
  bool unbatched = false;

  Shape shape_with_channels(std::size_t c) const {
    return unbatched ? Shape{c, length} : Shape{batch, c, length};
  }
};

BatchDims batch_dims(const Shape& shape, const char* op);

}  // namespace detail

}  // namespace sgbench::tensor
