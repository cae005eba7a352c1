#include <map>
#include <memory>
#include <mutex>
#include <numbers>
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

// Truncated real-DFT bases for length X and M retained modes.
//   forward: re = x * cos_fwd, im = -x * sin_fwd            ([X, M])
//   inverse: y = re * cos_inv + im * sin_inv                ([M, X])
// The inverse folds in the 1/X normalization and the factor 2 for modes that
// stand in for their negative-frequency conjugates.
struct DftBasis {
  RowMatrix cos_fwd, sin_fwd, cos_inv, sin_inv;
};

std::shared_ptr<const DftBasis> dft_basis(std::size_t length, std::size_t modes) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const DftBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{length, modes}];
  if (slot) return slot;

  auto basis = std::make_shared<DftBasis>();
  const auto n = static_cast<Eigen::Index>(length);
  const auto m = static_cast<Eigen::Index>(modes);
  basis->cos_fwd.resize(n, m);
  basis->sin_fwd.resize(n, m);
  basis->cos_inv.resize(m, n);
  basis->sin_inv.resize(m, n);
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t k = 0; k < modes; ++k) {
    const bool self_conjugate = k == 0 || 2 * k == length;
    const double weight = (self_conjugate ? 1.0 : 2.0) / static_cast<double>(length);
    for (std::size_t j = 0; j < length; ++j) {
      // Reduce k*j mod X before scaling so large products keep full accuracy.
      const double angle = two_pi_over_n * static_cast<double>((k * j) % length);
      const double c = std::cos(angle), s = std::sin(angle);
      const auto jj = static_cast<Eigen::Index>(j), kk = static_cast<Eigen::Index>(k);
      basis->cos_fwd(jj, kk) = c;
      basis->sin_fwd(jj, kk) = s;
      basis->cos_inv(kk, jj) = weight * c;
      basis->sin_inv(kk, jj) = -weight * s;
    }
  }
  slot = std::move(basis);
  return slot;
}

}  // namespace

Var spectral_conv1d(Var x, Var weight) {
  require(x.valid() && x.tape() == weight.tape(), ErrorKind::InvalidArgument,
          "spectral_conv1d: operands must live on the same tape");
  Tape& tape = *x.tape();
  const BatchDims d = detail::batch_dims(x.shape(), "spectral_conv1d");
  const Shape& ws = weight.shape();
  require(ws.size() == 4 && ws[1] == d.channels && ws[3] == 2, ErrorKind::ShapeMismatch,
          "spectral_conv1d: weight " + shape_string(ws) + " for input " + shape_string(x.shape()) +
              " (expected [C_out, C_in, M, 2])");
  const std::size_t cout = ws[0], cin = d.channels, modes = ws[2];
  require(modes >= 1 && modes <= d.length / 2 + 1, ErrorKind::InvalidArgument,
          "spectral_conv1d: retained modes " + std::to_string(modes) + " outside [1, X/2+1]");

  const auto basis = dft_basis(d.length, modes);
  const auto len = static_cast<Eigen::Index>(d.length);
  const auto m = static_cast<Eigen::Index>(modes);
  const auto in_rows = static_cast<Eigen::Index>(d.batch * cin);
  const auto out_rows = static_cast<Eigen::Index>(d.batch * cout);

  const ConstMatrixMap xin(x.value().data(), in_rows, len);
  RowMatrix xr = xin * basis->cos_fwd;
  RowMatrix xi = -(xin * basis->sin_fwd);

  const double* w = weight.value().data();
  RowMatrix yr = RowMatrix::Zero(out_rows, m), yi = RowMatrix::Zero(out_rows, m);
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      double* yr_row = yr.data() + (b * cout + o) * modes;
      double* yi_row = yi.data() + (b * cout + o) * modes;
      for (std::size_t i = 0; i < cin; ++i) {
        const double* xr_row = xr.data() + (b * cin + i) * modes;
        const double* xi_row = xi.data() + (b * cin + i) * modes;
        const double* w_oi = w + (o * cin + i) * modes * 2;
        for (std::size_t k = 0; k < modes; ++k) {
          const double wr = w_oi[2 * k], wi = w_oi[2 * k + 1];
          yr_row[k] += wr * xr_row[k] - wi * xi_row[k];
          yi_row[k] += wr * xi_row[k] + wi * xr_row[k];
        }
      }
    }
  }

  Tensor out(d.shape_with_channels(cout));
  MatrixMap y(out.data(), out_rows, len);
  y.noalias() = yr * basis->cos_inv;
  y.noalias() += yi * basis->sin_inv;

  const auto ix = x.id(), iw = weight.id();
  return tape.record(
      std::move(out), {ix, iw},
      [ix, iw, d, cout, cin, modes, basis, xr = std::move(xr), xi = std::move(xi), len, m, in_rows,
       out_rows](Tape& t, const Tensor& g) {
        const ConstMatrixMap gy(g.data(), out_rows, len);
        const RowMatrix gyr = gy * basis->cos_inv.transpose();
        const RowMatrix gyi = gy * basis->sin_inv.transpose();
        const bool need_x = t.requires_grad(ix), need_w = t.requires_grad(iw);
        RowMatrix gxr, gxi;
        if (need_x) {
          gxr = RowMatrix::Zero(in_rows, m);
          gxi = RowMatrix::Zero(in_rows, m);
        }
        const double* w = t.value(iw).data();
        double* gw = need_w ? t.grad_buffer(iw).data() : nullptr;
        for (std::size_t b = 0; b < d.batch; ++b) {
          for (std::size_t o = 0; o < cout; ++o) {
            const double* gr = gyr.data() + (b * cout + o) * modes;
            const double* gi = gyi.data() + (b * cout + o) * modes;
            for (std::size_t i = 0; i < cin; ++i) {
              const double* xr_row = xr.data() + (b * cin + i) * modes;
              const double* xi_row = xi.data() + (b * cin + i) * modes;
              const std::size_t woff = (o * cin + i) * modes * 2;
              for (std::size_t k = 0; k < modes; ++k) {
                if (need_w) {
                  gw[woff + 2 * k] += gr[k] * xr_row[k] + gi[k] * xi_row[k];
                  gw[woff + 2 * k + 1] += gi[k] * xr_row[k] - gr[k] * xi_row[k];
                }
                if (need_x) {
                  const double wr = w[woff + 2 * k], wi = w[woff + 2 * k + 1];
                  gxr.data()[(b * cin + i) * modes + k] += gr[k] * wr + gi[k] * wi;
                  gxi.data()[(b * cin + i) * modes + k] += gi[k] * wr - gr[k] * wi;
                }
              }
            }
          }
        }
        if (need_x) {
          MatrixMap gx(t.grad_buffer(ix).data(), in_rows, len);
          gx.noalias() += gxr * basis->cos_fwd.transpose();
          gx.noalias() -= gxi * basis->sin_fwd.transpose();
        }
      });
}

}  // namespace sgbench::tensor
