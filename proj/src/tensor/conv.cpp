#include <cstring>
#include <string>

#include "eigen_maps.hpp"
#include "sgbench/core/error.hpp"
#include "sgbench/tensor/ops.hpp"

namespace sgbench::tensor {
namespace {

using detail::BatchDims;
using detail::ConstMatrixMap;
using detail::MatrixMap;
using detail::RowMatrix;

std::size_t wrap_start(std::size_t k, std::size_t k_width, std::size_t len) {
  const auto n = static_cast<std::ptrdiff_t>(len);
  const auto s = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(k_width / 2);
  return static_cast<std::size_t>(((s % n) + n) % n);
}

// One sample: col[i*K + k, j] = x[i, (j + k - K/2) mod X]
void im2col(const double* x, std::size_t channels, std::size_t len, std::size_t k_width,
            RowMatrix& col) {
  col.resize(static_cast<Eigen::Index>(channels * k_width), static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < channels; ++i) {
    const double* src = x + i * len;
    for (std::size_t k = 0; k < k_width; ++k) {
      const std::size_t start = wrap_start(k, k_width, len);
      double* dst = col.data() + (i * k_width + k) * len;
      std::memcpy(dst, src + start, (len - start) * sizeof(double));
      std::memcpy(dst + (len - start), src, start * sizeof(double));
    }
  }
}

// Adjoint of im2col for one sample: scatter-add columns back to their sources.
void col2im_add(const RowMatrix& col, std::size_t channels, std::size_t len, std::size_t k_width,
                double* gx) {
  for (std::size_t i = 0; i < channels; ++i) {
    double* dst = gx + i * len;
    for (std::size_t k = 0; k < k_width; ++k) {
      const std::size_t start = wrap_start(k, k_width, len);
      const double* src = col.data() + (i * k_width + k) * len;
      for (std::size_t j = 0; j < len - start; ++j) dst[start + j] += src[j];
      for (std::size_t j = 0; j < start; ++j) dst[j] += src[len - start + j];
    }
  }
}

}  // namespace

Var conv1d_periodic(Var x, Var weight, Var bias) {
  require(x.valid() && x.tape() == weight.tape() && x.tape() == bias.tape(),
          ErrorKind::InvalidArgument, "conv1d_periodic: operands must live on the same tape");
  Tape& tape = *x.tape();
  const BatchDims d = detail::batch_dims(x.shape(), "conv1d_periodic");
  const Shape& ws = weight.shape();
  require(ws.size() == 3 && ws[1] == d.channels, ErrorKind::ShapeMismatch,
          "conv1d_periodic: kernel " + shape_string(ws) + " for input " + shape_string(x.shape()));
  const std::size_t cout = ws[0], k_width = ws[2];
  require(k_width % 2 == 1, ErrorKind::InvalidArgument,
          "conv1d_periodic: kernel width must be odd, got " + std::to_string(k_width));
  require(k_width <= d.length, ErrorKind::ShapeMismatch,
          "conv1d_periodic: kernel wider than the signal");
  require(bias.shape() == Shape{cout}, ErrorKind::ShapeMismatch,
          "conv1d_periodic: bias must be [" + std::to_string(cout) + "]");

  const auto len = static_cast<Eigen::Index>(d.length);
  const auto rows_out = static_cast<Eigen::Index>(cout);
  const auto inner = static_cast<Eigen::Index>(d.channels * k_width);
  const std::size_t in_stride = d.channels * d.length;
  const std::size_t out_stride = cout * d.length;

  // Per-sample products keep the unfolded input cache-resident.
  Tensor out(d.shape_with_channels(cout));
  const ConstMatrixMap w(weight.value().data(), rows_out, inner);
  const Eigen::Map<const Eigen::VectorXd> bv(bias.value().data(), rows_out);
  RowMatrix col;
  for (std::size_t b = 0; b < d.batch; ++b) {
    im2col(x.value().data() + b * in_stride, d.channels, d.length, k_width, col);
    MatrixMap ob(out.data() + b * out_stride, rows_out, len);
    ob.noalias() = w * col;
    ob.colwise() += bv;
  }

  const auto ix = x.id(), iw = weight.id(), ib = bias.id();
  return tape.record(std::move(out), {ix, iw, ib},
                     [ix, iw, ib, d, k_width, len, rows_out, inner, in_stride, out_stride](
                         Tape& t, const Tensor& g) {
    const bool need_b = t.requires_grad(ib), need_w = t.requires_grad(iw), need_x = t.requires_grad(ix);
    const ConstMatrixMap w(t.value(iw).data(), rows_out, inner);
    RowMatrix col, gcol;
    for (std::size_t b = 0; b < d.batch; ++b) {
      const ConstMatrixMap gb(g.data() + b * out_stride, rows_out, len);
      if (need_b) {
        Eigen::Map<Eigen::VectorXd>(t.grad_buffer(ib).data(), rows_out) += gb.rowwise().sum();
      }
      if (need_w) {
        im2col(t.value(ix).data() + b * in_stride, d.channels, d.length, k_width, col);
        MatrixMap gw(t.grad_buffer(iw).data(), rows_out, inner);
        gw.noalias() += gb * col.transpose();
      }
      if (need_x) {
        gcol.resize(inner, len);
        gcol.noalias() = w.transpose() * gb;
        col2im_add(gcol, d.channels, d.length, k_width, t.grad_buffer(ix).data() + b * in_stride);
      }
    }
  });
}

}  // namespace sgbench::tensor
