#include "sgbench/tensor/ops.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "eigen_maps.hpp"
#include "sgbench/core/error.hpp"

namespace sgbench::tensor {
namespace detail {

BatchDims batch_dims(const Shape& shape, const char* op) {
  BatchDims d;
  if (shape.size() == 3) {
    d.batch = shape[0];
    d.channels = shape[1];
    d.length = shape[2];
  } else if (shape.size() == 2) {
    d.channels = shape[0];
    d.length = shape[1];
    d.unbatched = true;
  } else {
    fail(ErrorKind::ShapeMismatch,
         std::string(op) + ": expected [B, C, X] or [C, X], got " + shape_string(shape));
  }
  return d;
}

}  // namespace detail

namespace {

using detail::batch_dims;
using detail::ConstMatrixMap;
using detail::MatrixMap;

Tape& same_tape(Var a, Var b, const char* op) {
  require(a.valid() && b.valid() && a.tape() == b.tape(), ErrorKind::InvalidArgument,
          std::string(op) + ": operands must live on the same tape");
  return *a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
  require(a.shape() == b.shape(), ErrorKind::ShapeMismatch,
          std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

}  // namespace

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b, "add");
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  const double* bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
    t.accumulate_grad(ia, g);
    t.accumulate_grad(ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  const double* bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
    t.accumulate_grad(ia, g);
    if (!t.requires_grad(ib)) return;
    Tensor& gb = t.grad_buffer(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var scale(Var a, double factor) {
  Tape& tape = *a.tape();
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [ia, factor](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  const double* bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var gelu(Var a) {
  Tape& tape = *a.tape();
  const Tensor& in = a.value();
  const auto n = static_cast<Eigen::Index>(in.size());
  Eigen::Map<const Eigen::ArrayXd> x(in.data(), n);
  // tanh(z) = 1 - 2 / (exp(2z) + 1) keeps the evaluation vectorized.
  auto th = std::make_shared<Eigen::ArrayXd>(
      1.0 - 2.0 / ((2.0 * kGeluScale * (x + kGeluCubic * x.cube())).exp() + 1.0));
  Tensor out(in.shape());
  Eigen::Map<Eigen::ArrayXd>(out.data(), n) = 0.5 * x * (1.0 + *th);
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [ia, th, n](Tape& t, const Tensor& g) {
    Eigen::Map<const Eigen::ArrayXd> xv(t.value(ia).data(), n);
    Eigen::Map<const Eigen::ArrayXd> gv(g.data(), n);
    Eigen::Map<Eigen::ArrayXd> ga(t.grad_buffer(ia).data(), n);
    const auto dinner = kGeluScale * (1.0 + 3.0 * kGeluCubic * xv.square());
    ga += gv * (0.5 * (1.0 + *th) + 0.5 * xv * (1.0 - th->square()) * dinner);
  });
}

Var mean_sq(Var a) {
  Tape& tape = *a.tape();
  const Tensor& v = a.value();
  require(!v.empty(), ErrorKind::ShapeMismatch, "mean_sq: empty tensor");
  double acc = 0.0;
  for (double x : v.values()) acc += x * x;
  const double n = static_cast<double>(v.size());
  const auto ia = a.id();
  return tape.record(Tensor::scalar(acc / n), {ia}, [ia, n](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(ia);
    Tensor& ga = t.grad_buffer(ia);
    const double c = 2.0 * g[0] / n;
    for (std::size_t i = 0; i < xv.size(); ++i) ga[i] += c * xv[i];
  });
}

Var reshape(Var a, Shape shape) {
  Tape& tape = *a.tape();
  Tensor out = a.value().reshaped(std::move(shape));
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [ia](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var matmul_channels(Var x, Var weight, Var bias) {
  Tape& tape = same_tape(x, weight, "matmul_channels");
  same_tape(x, bias, "matmul_channels");
  const auto d = batch_dims(x.shape(), "matmul_channels");
  const Shape& ws = weight.shape();
  require(ws.size() == 2 && ws[1] == d.channels, ErrorKind::ShapeMismatch,
          "matmul_channels: weight " + shape_string(ws) + " for input " + shape_string(x.shape()));
  const std::size_t cout = ws[0];
  require(bias.shape() == Shape{cout}, ErrorKind::ShapeMismatch,
          "matmul_channels: bias must be [" + std::to_string(cout) + "]");

  Tensor out(d.shape_with_channels(cout));
  const ConstMatrixMap w(weight.value().data(), static_cast<Eigen::Index>(cout),
                         static_cast<Eigen::Index>(d.channels));
  const double* bv = bias.value().data();
  for (std::size_t b = 0; b < d.batch; ++b) {
    const ConstMatrixMap xb(x.value().data() + b * d.channels * d.length,
                            static_cast<Eigen::Index>(d.channels),
                            static_cast<Eigen::Index>(d.length));
    MatrixMap ob(out.data() + b * cout * d.length, static_cast<Eigen::Index>(cout),
                 static_cast<Eigen::Index>(d.length));
    ob.noalias() = w * xb;
    for (std::size_t o = 0; o < cout; ++o) ob.row(static_cast<Eigen::Index>(o)).array() += bv[o];
  }

  const auto ix = x.id(), iw = weight.id(), ib = bias.id();
  return tape.record(std::move(out), {ix, iw, ib}, [ix, iw, ib, d, cout](Tape& t, const Tensor& g) {
    const auto rows_in = static_cast<Eigen::Index>(d.channels);
    const auto rows_out = static_cast<Eigen::Index>(cout);
    const auto cols = static_cast<Eigen::Index>(d.length);
    const ConstMatrixMap w(t.value(iw).data(), rows_out, rows_in);
    const bool need_x = t.requires_grad(ix);
    const bool need_w = t.requires_grad(iw);
    const bool need_b = t.requires_grad(ib);
    double* gx = need_x ? t.grad_buffer(ix).data() : nullptr;
    double* gw = need_w ? t.grad_buffer(iw).data() : nullptr;
    double* gb = need_b ? t.grad_buffer(ib).data() : nullptr;
    for (std::size_t b = 0; b < d.batch; ++b) {
      const ConstMatrixMap gout(g.data() + b * cout * d.length, rows_out, cols);
      if (need_x) {
        MatrixMap gxb(gx + b * d.channels * d.length, rows_in, cols);
        gxb.noalias() += w.transpose() * gout;
      }
      if (need_w) {
        const ConstMatrixMap xb(t.value(ix).data() + b * d.channels * d.length, rows_in, cols);
        MatrixMap gwm(gw, rows_out, rows_in);
        gwm.noalias() += gout * xb.transpose();
      }
      if (need_b) {
        for (std::size_t o = 0; o < cout; ++o) gb[o] += gout.row(static_cast<Eigen::Index>(o)).sum();
      }
    }
  });
}

Var linear(Var x, Var weight, Var bias) {
  const Shape& xs = x.shape();
  require(xs.size() == 2, ErrorKind::ShapeMismatch, "linear: expected [B, E], got " + shape_string(xs));
  const std::size_t rows = xs[0];
  Var y = matmul_channels(reshape(x, {rows, xs[1], 1}), weight, bias);
  return reshape(y, {rows, weight.shape().at(0)});
}

Var add_channel_shift(Var x, Var shift) {
  Tape& tape = same_tape(x, shift, "add_channel_shift");
  const auto d = batch_dims(x.shape(), "add_channel_shift");
  const Shape expected = d.unbatched ? Shape{d.channels} : Shape{d.batch, d.channels};
  const Shape& ss = shift.shape();
  const bool ok = ss == expected || (d.unbatched && ss == Shape{1, d.channels});
  require(ok, ErrorKind::ShapeMismatch,
          "add_channel_shift: shift " + shape_string(ss) + " for input " + shape_string(x.shape()));
  Tensor out = x.value();
  const double* sv = shift.value().data();
  for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
    double* row = out.data() + bc * d.length;
    for (std::size_t j = 0; j < d.length; ++j) row[j] += sv[bc];
  }
  const auto ix = x.id(), is = shift.id();
  return tape.record(std::move(out), {ix, is}, [ix, is, d](Tape& t, const Tensor& g) {
    t.accumulate_grad(ix, g);
    if (!t.requires_grad(is)) return;
    Tensor& gs = t.grad_buffer(is);
    for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
      const double* row = g.data() + bc * d.length;
      double acc = 0.0;
      for (std::size_t j = 0; j < d.length; ++j) acc += row[j];
      gs[bc] += acc;
    }
  });
}

Var concat_channels(Var a, Var b) {
  Tape& tape = same_tape(a, b, "concat_channels");
  const auto da = batch_dims(a.shape(), "concat_channels");
  const auto db = batch_dims(b.shape(), "concat_channels");
  require(da.batch == db.batch && da.length == db.length && da.unbatched == db.unbatched,
          ErrorKind::ShapeMismatch,
          "concat_channels: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  const std::size_t c = da.channels + db.channels;
  Tensor out(da.shape_with_channels(c));
  const std::size_t sa = da.channels * da.length, sb = db.channels * db.length;
  for (std::size_t n = 0; n < da.batch; ++n) {
    std::copy_n(a.value().data() + n * sa, sa, out.data() + n * (sa + sb));
    std::copy_n(b.value().data() + n * sb, sb, out.data() + n * (sa + sb) + sa);
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib, sa, sb, batch = da.batch](Tape& t, const Tensor& g) {
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t i = 0; i < sa; ++i) ga[n * sa + i] += g[n * (sa + sb) + i];
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t i = 0; i < sb; ++i) gb[n * sb + i] += g[n * (sa + sb) + sa + i];
    }
  });
}

Var slice_channels(Var a, std::size_t begin, std::size_t end) {
  Tape& tape = *a.tape();
  const auto d = batch_dims(a.shape(), "slice_channels");
  require(begin < end && end <= d.channels, ErrorKind::ShapeMismatch,
          "slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(end) +
              ") outside " + std::to_string(d.channels) + " channels");
  const std::size_t c = end - begin;
  Tensor out(d.shape_with_channels(c));
  const std::size_t stride = d.channels * d.length, width = c * d.length,
                    offset = begin * d.length;
  for (std::size_t n = 0; n < d.batch; ++n) {
    std::copy_n(a.value().data() + n * stride + offset, width, out.data() + n * width);
  }
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [ia, d, stride, width, offset](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t n = 0; n < d.batch; ++n)
      for (std::size_t i = 0; i < width; ++i) ga[n * stride + offset + i] += g[n * width + i];
  });
}

}  // namespace sgbench::tensor
