#pragma once

#include <vector>

#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Multi-channel zero-padded 2-D cross-correlation, weights shaped
/// (out_ch, in_ch, k, k). Spatial extent is preserved. The kernels copy
/// their input into an explicitly zero-padded buffer so the inner loops
/// run branch-free over full rows, which lets the compiler vectorize them.
struct ConvLayer {
  std::size_t out_ch = 0, in_ch = 0, k = 1;
  Tensor weights;

  ConvLayer() = default;
  ConvLayer(std::size_t out, std::size_t in, std::size_t kk)
      : out_ch(out), in_ch(in), k(kk), weights({out, in, kk, kk}) {
    if (kk % 2 == 0) throw ShapeError("conv window must be odd");
  }

  double w(std::size_t o, std::size_t m, std::size_t a, std::size_t b) const {
    return weights[((o * in_ch + m) * k + a) * k + b];
  }
  double& w(std::size_t o, std::size_t m, std::size_t a, std::size_t b) {
    return weights[((o * in_ch + m) * k + a) * k + b];
  }

  Tensor forward(const Tensor& x) const {
    if (x.rank() != 3 || x.shape()[0] != in_ch) throw ShapeError("conv forward: shape mismatch");
    std::size_t H = x.shape()[1], W = x.shape()[2], p = k / 2;
    std::size_t Hp = H + 2 * p, Wp = W + 2 * p;
    std::vector<double> pad(in_ch * Hp * Wp, 0.0);
    pad_channels_(x, pad, H, W, Hp, Wp, p);
    Tensor y({out_ch, H, W});
    for (std::size_t o = 0; o < out_ch; ++o) {
      for (std::size_t m = 0; m < in_ch; ++m) {
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = 0; b < k; ++b) {
            double wv = w(o, m, a, b);
            if (wv == 0.0) continue;
            for (std::size_t i = 0; i < H; ++i) {
              const double* __restrict xr = &pad[(m * Hp + i + a) * Wp + b];
              double* __restrict yr = &y.at3(o, i, 0);
              for (std::size_t j = 0; j < W; ++j) yr[j] += wv * xr[j];
            }
          }
        }
      }
    }
    return y;
  }

  /// Transpose of forward with respect to the input: a cross-correlation
  /// of the padded output gradient with the flipped window.
  Tensor adjoint(const Tensor& y, std::size_t H, std::size_t W) const {
    if (y.rank() != 3 || y.shape()[0] != out_ch || y.shape()[1] != H || y.shape()[2] != W) {
      throw ShapeError("conv adjoint: shape mismatch");
    }
    std::size_t p = k / 2;
    std::size_t Hp = H + 2 * p, Wp = W + 2 * p;
    std::vector<double> pad(out_ch * Hp * Wp, 0.0);
    pad_channels_(y, pad, H, W, Hp, Wp, p);
    Tensor x({in_ch, H, W});
    for (std::size_t m = 0; m < in_ch; ++m) {
      for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = 0; b < k; ++b) {
            double wv = w(o, m, a, b);
            if (wv == 0.0) continue;
            // y[o, u - a + p, v - b + p] feeds x[m, u, v].
            for (std::size_t u = 0; u < H; ++u) {
              const double* __restrict yr = &pad[(o * Hp + u + 2 * p - a) * Wp + 2 * p - b];
              double* __restrict xr = &x.at3(m, u, 0);
              for (std::size_t v = 0; v < W; ++v) xr[v] += wv * yr[v];
            }
          }
        }
      }
    }
    return x;
  }

  /// d(sum_o <grad_out_o, forward(x)_o>)/d(weights).
  Tensor weight_grad(const Tensor& x, const Tensor& grad_out) const {
    if (x.shape()[0] != in_ch || grad_out.shape()[0] != out_ch) {
      throw ShapeError("conv weight_grad: shape mismatch");
    }
    std::size_t H = x.shape()[1], W = x.shape()[2], p = k / 2;
    std::size_t Hp = H + 2 * p, Wp = W + 2 * p;
    std::vector<double> pad(in_ch * Hp * Wp, 0.0);
    pad_channels_(x, pad, H, W, Hp, Wp, p);
    Tensor g({out_ch, in_ch, k, k});
    std::vector<double> col(W);  // per-column partial sums; vectorizes, unlike a scalar reduction
    for (std::size_t o = 0; o < out_ch; ++o) {
      for (std::size_t m = 0; m < in_ch; ++m) {
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = 0; b < k; ++b) {
            double* __restrict cl = col.data();
            for (std::size_t j = 0; j < W; ++j) cl[j] = 0.0;
            for (std::size_t i = 0; i < H; ++i) {
              const double* __restrict gr = &grad_out.at3(o, i, 0);
              const double* __restrict xr = &pad[(m * Hp + i + a) * Wp + b];
              for (std::size_t j = 0; j < W; ++j) cl[j] += gr[j] * xr[j];
            }
            double acc = 0.0;
            for (std::size_t j = 0; j < W; ++j) acc += cl[j];
            g[((o * in_ch + m) * k + a) * k + b] = acc;
          }
        }
      }
    }
    return g;
  }

 private:
  static void pad_channels_(const Tensor& t, std::vector<double>& pad, std::size_t H,
                            std::size_t W, std::size_t Hp, std::size_t Wp, std::size_t p) {
    std::size_t C = t.shape()[0];
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < H; ++i) {
        const double* __restrict src = &t.at3(c, i, 0);
        double* __restrict dst = &pad[(c * Hp + i + p) * Wp + p];
        for (std::size_t j = 0; j < W; ++j) dst[j] = src[j];
      }
    }
  }
};

}  // namespace crrlearn
