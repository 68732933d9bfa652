#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "crrlearn/operators.hpp"
#include "crrlearn/rng.hpp"
#include "crrlearn/tensor.hpp"

namespace crrlearn {

class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

enum class LikelihoodDomain { Unrestricted, NonNegative };

/// Negative log-likelihood f_y with gradient.
class Likelihood {
 public:
  virtual ~Likelihood() = default;
  virtual double value(const Tensor& x) const = 0;
  virtual Tensor grad(const Tensor& x) const = 0;
  virtual std::pair<double, Tensor> value_grad(const Tensor& x) const {
    return {value(x), grad(x)};
  }
  virtual LikelihoodDomain domain() const = 0;
  virtual const std::vector<std::size_t>& input_shape() const = 0;
};

/// f_y(x) = |Ax - y|^2 / (2 sigma^2).
class GaussianLikelihood final : public Likelihood {
 public:
  GaussianLikelihood(LinearOperator op, Tensor y, double sigma)
      : op_(std::move(op)), y_(std::move(y)), sigma_(sigma) {
    if (sigma_ <= 0.0) throw DomainError("sigma must be positive");
    if (y_.shape() != op_.output_shape()) throw ShapeError("measurement/operator shape mismatch");
  }

  double value(const Tensor& x) const override {
    Tensor r = op_.apply(x);
    r -= y_;
    return r.dot(r) / (2.0 * sigma_ * sigma_);
  }

  Tensor grad(const Tensor& x) const override {
    Tensor r = op_.apply(x);
    r -= y_;
    Tensor g = op_.adjoint(r);
    g *= 1.0 / (sigma_ * sigma_);
    return g;
  }

  std::pair<double, Tensor> value_grad(const Tensor& x) const override {
    Tensor r = op_.apply(x);
    r -= y_;
    double v = r.dot(r) / (2.0 * sigma_ * sigma_);
    Tensor g = op_.adjoint(r);
    g *= 1.0 / (sigma_ * sigma_);
    return {v, std::move(g)};
  }

  LikelihoodDomain domain() const override { return LikelihoodDomain::Unrestricted; }
  const std::vector<std::size_t>& input_shape() const override { return op_.input_shape(); }
  const LinearOperator& op() const { return op_; }
  const Tensor& y() const { return y_; }
  double sigma() const { return sigma_; }

 private:
  LinearOperator op_;
  Tensor y_;
  double sigma_;
};

/// Mollified Poisson negative log-likelihood for y ~ Pois(eta x):
/// f_y(x) = sum_i [eta (x_i + b) - y_i log(eta (x_i + b))], grad entries
/// eta - y_i / (x_i + b). The theta- and x-independent log(y_i!) term is
/// dropped; pass exact_value=true to add it back via lgamma for reporting.
class PoissonLikelihood final : public Likelihood {
 public:
  PoissonLikelihood(Tensor y, double eta, double b, bool exact_value = false)
      : y_(std::move(y)), eta_(eta), b_(b), exact_value_(exact_value), shape_(y_.shape()) {
    if (eta_ <= 0.0 || b_ <= 0.0) throw DomainError("eta and b must be positive");
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (y_[i] < 0.0 || y_[i] != std::floor(y_[i])) {
        throw DomainError("Poisson counts must be non-negative integers");
      }
    }
  }

  double value(const Tensor& x) const override {
    check_domain_(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double m = eta_ * (x[i] + b_);
      acc += m - y_[i] * std::log(m);
      if (exact_value_) acc += std::lgamma(y_[i] + 1.0);
    }
    return acc;
  }

  Tensor grad(const Tensor& x) const override {
    check_domain_(x);
    Tensor g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = eta_ - y_[i] / (x[i] + b_);
    return g;
  }

  LikelihoodDomain domain() const override { return LikelihoodDomain::NonNegative; }
  const std::vector<std::size_t>& input_shape() const override { return shape_; }
  const Tensor& y() const { return y_; }
  double eta() const { return eta_; }
  double b() const { return b_; }

 private:
  void check_domain_(const Tensor& x) const {
    if (x.shape() != shape_) throw ShapeError("Poisson likelihood: shape mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] <= -b_) throw DomainError("x entry at or below -b");
    }
  }

  Tensor y_;
  double eta_;
  double b_;
  bool exact_value_;
  std::vector<std::size_t> shape_;
};

/// y = A x + sigma Z per image. Metadata records sigma, kernel name, seed.
inline Dataset corrupt_gaussian(const Dataset& clean, const LinearOperator& op, double sigma,
                                std::uint64_t seed) {
  clean.validate();
  if (sigma < 0.0) throw DomainError("sigma must be non-negative");
  Dataset out;
  out.metadata = clean.metadata;
  out.metadata["noise"] = "gaussian";
  out.metadata["sigma"] = to_precise_string(sigma);
  out.metadata["operator"] =
      op.kind() == OperatorKind::Conv2D ? op.kernel().name
      : op.kind() == OperatorKind::Mask ? std::string("mask")
      : op.kind() == OperatorKind::FiniteDifference ? std::string("finite_difference")
                                                    : std::string("identity");
  out.metadata["seed"] = std::to_string(seed);
  for (std::size_t n = 0; n < clean.items.size(); ++n) {
    RngStream rng(seed, n);
    Tensor y = op.apply(clean.items[n].tensor);
    if (sigma > 0.0) y.axpy(sigma, sample_std_normal(rng, y.shape()));
    out.items.emplace_back(std::move(y));
  }
  return out;
}

/// y_i ~ Pois(eta x_i) with per-image eta = miv / mean(x); mollifier
/// b = miv / 100 is recorded in the metadata.
inline Dataset corrupt_poisson(const Dataset& clean, double miv, std::uint64_t seed) {
  clean.validate();
  if (miv <= 0.0) throw DomainError("mean intensity value must be positive");
  Dataset out;
  out.metadata = clean.metadata;
  out.metadata["noise"] = "poisson";
  out.metadata["miv"] = to_precise_string(miv);
  out.metadata["b"] = to_precise_string(miv / 100.0);
  out.metadata["seed"] = std::to_string(seed);
  for (std::size_t n = 0; n < clean.items.size(); ++n) {
    const Tensor& x = clean.items[n].tensor;
    double mean = x.mean();
    if (mean <= 0.0) throw DomainError("all-zero image has no Poisson scale");
    double eta = miv / mean;
    RngStream rng(seed, n);
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < 0.0) throw DomainError("Poisson corruption needs non-negative intensities");
      y[i] = double(rng.next_poisson(eta * x[i]));
    }
    out.items.emplace_back(std::move(y));
    out.metadata["eta_" + std::to_string(n)] = to_precise_string(eta);
  }
  return out;
}

}  // namespace crrlearn
