#pragma once

#include <cmath>

#include "crrlearn/operators.hpp"
#include "crrlearn/prior.hpp"

namespace crrlearn {

/// Isotropic total variation with Charbonnier smoothing, anchored so that
/// constant images score exactly zero:
///   tv(x) = weight * sum_p [ sqrt(|Dx|_p^2 + eps^2) - eps ]
/// where |Dx|_p pairs the horizontal and vertical forward differences at
/// pixel p. eps > 0 keeps the gradient defined on flat regions.
class SmoothedTV final : public Prior {
 public:
  explicit SmoothedTV(double weight, double eps = 1e-3) : weight_(weight), eps_(eps) {
    if (eps_ <= 0.0) throw ShapeError("TV smoothing eps must be positive");
  }

  double value(const Tensor& x) const override {
    LinearOperator d = LinearOperator::finite_difference(x.shape());
    Tensor dx = d.apply(x);
    std::size_t C = x.shape()[0], HW = x.shape()[1] * x.shape()[2];
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double* h = dx.data() + c * HW;
      const double* v = dx.data() + (C + c) * HW;
      for (std::size_t p = 0; p < HW; ++p) {
        acc += std::sqrt(h[p] * h[p] + v[p] * v[p] + eps_ * eps_) - eps_;
      }
    }
    return weight_ * acc;
  }

  Tensor grad(const Tensor& x) const override {
    LinearOperator d = LinearOperator::finite_difference(x.shape());
    Tensor dx = d.apply(x);
    std::size_t C = x.shape()[0], HW = x.shape()[1] * x.shape()[2];
    for (std::size_t c = 0; c < C; ++c) {
      double* h = dx.data() + c * HW;
      double* v = dx.data() + (C + c) * HW;
      for (std::size_t p = 0; p < HW; ++p) {
        double n = std::sqrt(h[p] * h[p] + v[p] * v[p] + eps_ * eps_);
        h[p] /= n;
        v[p] /= n;
      }
    }
    Tensor g = d.adjoint(dx);
    g *= weight_;
    return g;
  }

  double weight() const { return weight_; }
  double eps() const { return eps_; }

 private:
  double weight_;
  double eps_;
};

}  // namespace crrlearn
