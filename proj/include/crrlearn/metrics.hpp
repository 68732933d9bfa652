#pragma once

#include <cmath>

#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Peak signal-to-noise ratio in dB; identical inputs cap at 99 dB so CSV
/// reports stay finite.
inline double psnr(const Tensor& x, const Tensor& ref, double peak = 1.0) {
  if (!x.same_shape(ref)) throw ShapeError("psnr: shape mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - ref[i];
    mse += d * d;
  }
  mse /= double(x.size());
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
/// peak 1, averaged over the valid (fully-windowed) region and channels.
inline double ssim(const Tensor& x, const Tensor& ref) {
  if (!x.same_shape(ref)) throw ShapeError("ssim: shape mismatch");
  if (x.rank() != 3) throw ShapeError("ssim expects (C,H,W)");
  std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  constexpr std::size_t win = 11;
  if (H < win || W < win) throw ShapeError("ssim needs extent >= 11");

  double w[win];
  double total = 0.0;
  for (std::size_t a = 0; a < win; ++a) {
    double t = double(a) - 5.0;
    w[a] = std::exp(-t * t / (2.0 * 1.5 * 1.5));
    total += w[a];
  }
  for (double& v : w) v /= total;

  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i + win <= H; ++i) {
      for (std::size_t j = 0; j + win <= W; ++j) {
        double mx = 0.0, mr = 0.0, xx = 0.0, rr = 0.0, xr = 0.0;
        for (std::size_t a = 0; a < win; ++a) {
          for (std::size_t b = 0; b < win; ++b) {
            double wt = w[a] * w[b];
            double xv = x.at3(c, i + a, j + b);
            double rv = ref.at3(c, i + a, j + b);
            mx += wt * xv;
            mr += wt * rv;
            xx += wt * xv * xv;
            rr += wt * rv * rv;
            xr += wt * xv * rv;
          }
        }
        double vx = xx - mx * mx, vr = rr - mr * mr, cov = xr - mx * mr;
        acc += ((2.0 * mx * mr + c1) * (2.0 * cov + c2)) /
               ((mx * mx + mr * mr + c1) * (vx + vr + c2));
        ++count;
      }
    }
  }
  return acc / double(count);
}

}  // namespace crrlearn
