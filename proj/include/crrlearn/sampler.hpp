#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "crrlearn/rng.hpp"
#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Raised when a Langevin chain leaves the numerical trust region.
class ChainDiverged : public std::runtime_error {
 public:
  ChainDiverged(const std::string& what, std::uint64_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_count(step) {}
  std::uint64_t step_count;
};

constexpr double kDivergenceThreshold = 1e8;

/// One unadjusted Langevin step x' = x - gamma * grad E(x) + sqrt(2 gamma) z
/// with z the standard normal innovation (passed in so tests can pin it).
/// reflected=true maps the proposal through |.| componentwise, which keeps
/// chains for non-negativity-constrained targets inside their domain.
inline Tensor ula_update(const Tensor& x, const Tensor& grad, double gamma, const Tensor& z,
                         bool reflected, std::uint64_t step) {
  if (!x.same_shape(grad) || !x.same_shape(z)) throw ShapeError("ULA step: shape mismatch");
  Tensor next = x;
  next.axpy(-gamma, grad);
  next.axpy(std::sqrt(2.0 * gamma), z);
  if (reflected) {
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::fabs(next[i]);
  }
  if (!next.all_finite() || next.max_abs() > kDivergenceThreshold) {
    throw ChainDiverged("Langevin chain diverged", step);
  }
  return next;
}

template <typename GradFn>
Tensor ula_step(const Tensor& x, GradFn&& grad_fn, double gamma, RngStream& rng, bool reflected,
                std::uint64_t step) {
  Tensor z = sample_std_normal(rng, x.shape());
  return ula_update(x, grad_fn(x), gamma, z, reflected, step);
}

/// Streaming mean / population variance over same-shaped tensors.
class WelfordAccumulator {
 public:
  void add(const Tensor& x) {
    if (n_ == 0) {
      mean_ = Tensor(x.shape());
      m2_ = Tensor(x.shape());
    }
    ++n_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - mean_[i];
      mean_[i] += d / double(n_);
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }

  std::size_t count() const { return n_; }

  const Tensor& mean() const {
    require_data_();
    return mean_;
  }

  Tensor variance() const {
    require_data_();
    Tensor v = m2_;
    v *= 1.0 / double(n_);
    return v;
  }

  Tensor std_dev() const {
    Tensor s = variance();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(s[i]);
    return s;
  }

 private:
  void require_data_() const {
    if (n_ == 0) throw std::runtime_error("moment accumulator is empty");
  }

  std::size_t n_ = 0;
  Tensor mean_, m2_;
};

}  // namespace crrlearn
