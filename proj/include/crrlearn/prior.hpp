#pragma once

#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Convex regularizer g with gradient in x.
class Prior {
 public:
  virtual ~Prior() = default;
  virtual double value(const Tensor& x) const = 0;
  virtual Tensor grad(const Tensor& x) const = 0;
};

/// g(x) = theta |x|^2 / 2. Conjugate to Gaussian likelihoods, which makes
/// it the oracle vehicle for the closed-form MLE and posterior checks.
class QuadraticPrior final : public Prior {
 public:
  explicit QuadraticPrior(double theta) : theta_(theta) {
    if (theta_ <= 0.0) throw ShapeError("quadratic prior needs theta > 0");
  }
  double value(const Tensor& x) const override { return 0.5 * theta_ * x.dot(x); }
  Tensor grad(const Tensor& x) const override { return x * theta_; }
  double theta() const { return theta_; }

 private:
  double theta_;
};

}  // namespace crrlearn
