#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crrlearn/rng.hpp"
#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Square odd-sized kernel, applied channel-wise for blur operators.
struct Kernel {
  std::size_t size = 1;
  Tensor weights;  // (size, size)
  std::string name;
};

inline Kernel gaussian_blur_kernel(std::size_t size, double strength) {
  if (size % 2 == 0) throw ShapeError("kernel size must be odd");
  if (strength <= 0.0) throw ShapeError("blur strength must be positive");
  Kernel k;
  k.size = size;
  k.weights = Tensor({size, size});
  k.name = "gaussian" + std::to_string(size) + "_s" + std::to_string(strength);
  double c = double(size - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      double r2 = (double(i) - c) * (double(i) - c) + (double(j) - c) * (double(j) - c);
      double w = std::exp(-r2 / (2.0 * strength * strength));
      k.weights[i * size + j] = w;
      total += w;
    }
  }
  k.weights *= 1.0 / total;
  return k;
}

inline Kernel uniform_blur_kernel(std::size_t size) {
  if (size % 2 == 0) throw ShapeError("kernel size must be odd");
  Kernel k;
  k.size = size;
  k.weights = Tensor({size, size});
  k.name = "uniform" + std::to_string(size);
  k.weights.fill(1.0 / double(size * size));
  return k;
}

inline Kernel delta_kernel(std::size_t size = 1) {
  if (size % 2 == 0) throw ShapeError("kernel size must be odd");
  Kernel k;
  k.size = size;
  k.weights = Tensor({size, size});
  k.name = "delta";
  k.weights[(size / 2) * size + size / 2] = 1.0;
  return k;
}

enum class OperatorKind { Identity, Conv2D, Mask, FiniteDifference };

/// Linear forward operator with an exact adjoint. Conv2D is channel-wise
/// zero-padded cross-correlation; FiniteDifference maps (C,H,W) to (2C,H,W)
/// forward differences with zero last column/row.
class LinearOperator {
 public:
  static LinearOperator identity(std::vector<std::size_t> shape) {
    LinearOperator op;
    op.kind_ = OperatorKind::Identity;
    op.in_shape_ = shape;
    op.out_shape_ = std::move(shape);
    return op;
  }

  static LinearOperator conv2d(std::vector<std::size_t> shape, Kernel kernel) {
    LinearOperator op;
    op.kind_ = OperatorKind::Conv2D;
    op.in_shape_ = shape;
    op.out_shape_ = std::move(shape);
    op.kernel_ = std::move(kernel);
    return op;
  }

  static LinearOperator mask(Tensor mask01) {
    LinearOperator op;
    op.kind_ = OperatorKind::Mask;
    op.in_shape_ = mask01.shape();
    op.out_shape_ = mask01.shape();
    op.mask_ = std::move(mask01);
    return op;
  }

  /// Bernoulli(keep_prob) mask with a recorded seed, realizing a
  /// missing-pixel fraction of 1 - keep_prob.
  static LinearOperator random_mask(std::vector<std::size_t> shape, double keep_prob,
                                    std::uint64_t seed) {
    Tensor m(shape);
    RngStream rng(seed, 0x6d61736bULL);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.next_uniform() <= keep_prob ? 1.0 : 0.0;
    return mask(std::move(m));
  }

  static LinearOperator finite_difference(std::vector<std::size_t> shape) {
    if (shape.size() != 3) throw ShapeError("finite difference expects (C,H,W)");
    LinearOperator op;
    op.kind_ = OperatorKind::FiniteDifference;
    op.in_shape_ = shape;
    op.out_shape_ = {2 * shape[0], shape[1], shape[2]};
    return op;
  }

  OperatorKind kind() const { return kind_; }
  const std::vector<std::size_t>& input_shape() const { return in_shape_; }
  const std::vector<std::size_t>& output_shape() const { return out_shape_; }
  const Kernel& kernel() const { return kernel_; }
  const Tensor& mask_tensor() const { return mask_; }

  Tensor apply(const Tensor& x) const {
    if (x.shape() != in_shape_) throw ShapeError("operator apply: shape mismatch");
    switch (kind_) {
      case OperatorKind::Identity:
        return x;
      case OperatorKind::Mask: {
        Tensor y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask_[i];
        return y;
      }
      case OperatorKind::Conv2D:
        return correlate_(x, false);
      case OperatorKind::FiniteDifference:
        return forward_diff_(x);
    }
    throw std::logic_error("unreachable");
  }

  Tensor adjoint(const Tensor& y) const {
    if (y.shape() != out_shape_) throw ShapeError("operator adjoint: shape mismatch");
    switch (kind_) {
      case OperatorKind::Identity:
        return y;
      case OperatorKind::Mask: {
        Tensor x = y;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= mask_[i];
        return x;
      }
      case OperatorKind::Conv2D:
        return correlate_(y, true);
      case OperatorKind::FiniteDifference:
        return diff_adjoint_(y);
    }
    throw std::logic_error("unreachable");
  }

 private:
  // Channel-wise zero-padded cross-correlation; flip=true gives the adjoint.
  Tensor correlate_(const Tensor& x, bool flip) const {
    std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    std::size_t k = kernel_.size;
    long ctr = long(k) / 2;
    Tensor y({C, H, W});
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < W; ++j) {
          double acc = 0.0;
          for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
              long da = long(a) - ctr, db = long(b) - ctr;
              long ii = long(i) + (flip ? -da : da);
              long jj = long(j) + (flip ? -db : db);
              if (ii < 0 || jj < 0 || ii >= long(H) || jj >= long(W)) continue;
              acc += kernel_.weights[a * k + b] * x.at3(c, std::size_t(ii), std::size_t(jj));
            }
          }
          y.at3(c, i, j) = acc;
        }
      }
    }
    return y;
  }

  Tensor forward_diff_(const Tensor& x) const {
    std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    Tensor y({2 * C, H, W});
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < W; ++j) {
          y.at3(c, i, j) = j + 1 < W ? x.at3(c, i, j + 1) - x.at3(c, i, j) : 0.0;
          y.at3(C + c, i, j) = i + 1 < H ? x.at3(c, i + 1, j) - x.at3(c, i, j) : 0.0;
        }
      }
    }
    return y;
  }

  Tensor diff_adjoint_(const Tensor& y) const {
    std::size_t C = in_shape_[0], H = in_shape_[1], W = in_shape_[2];
    Tensor x({C, H, W});
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < W; ++j) {
          double acc = 0.0;
          if (j >= 1) acc += y.at3(c, i, j - 1);
          if (j + 1 < W) acc -= y.at3(c, i, j);
          if (i >= 1) acc += y.at3(C + c, i - 1, j);
          if (i + 1 < H) acc -= y.at3(C + c, i, j);
          x.at3(c, i, j) = acc;
        }
      }
    }
    return x;
  }

  OperatorKind kind_ = OperatorKind::Identity;
  std::vector<std::size_t> in_shape_;
  std::vector<std::size_t> out_shape_;
  Kernel kernel_;
  Tensor mask_;
};

}  // namespace crrlearn
