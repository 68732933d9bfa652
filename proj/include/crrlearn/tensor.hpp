#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace crrlearn {

/// Round-trippable decimal formatting for doubles.
inline std::string to_precise_string(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major tensor of 64-bit reals (last axis fastest).
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count_(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count_(shape_)) {
      throw ShapeError("tensor data length does not match shape");
    }
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // (c, i, j) accessors for rank-3 tensors.
  double& at3(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  const double& at3(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  Tensor& operator+=(const Tensor& o) {
    check_shape_(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_shape_(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  /// y += s * x
  void axpy(double s, const Tensor& x) {
    check_shape_(x);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * x.data_[i];
  }

  double dot(const Tensor& o) const {
    check_shape_(o);
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) acc += data_[i] * o.data_[i];
    return acc;
  }

  double norm2() const { return std::sqrt(dot(*this)); }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

  double sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }
  double mean() const { return data_.empty() ? 0.0 : sum() / double(data_.size()); }

 private:
  static std::size_t count_(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
      if (e == 0) throw ShapeError("zero extent in tensor shape");
      n *= e;
    }
    return shape.empty() ? 0 : n;
  }
  void check_shape_(const Tensor& o) const {
    if (!same_shape(o)) throw ShapeError("tensor shape mismatch");
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Image: (channels, height, width) tensor, intensities nominally in [0,1].
struct Image {
  Image() = default;
  Image(std::size_t channels, std::size_t height, std::size_t width)
      : tensor({channels, height, width}) {
    validate();
  }
  explicit Image(Tensor t) : tensor(std::move(t)) { validate(); }

  std::size_t channels() const { return tensor.shape()[0]; }
  std::size_t height() const { return tensor.shape()[1]; }
  std::size_t width() const { return tensor.shape()[2]; }

  void validate() const {
    if (tensor.rank() != 3) throw ShapeError("image tensor must have rank 3");
    std::size_t c = tensor.shape()[0];
    if (c != 1 && c != 3) throw ShapeError("image must have 1 or 3 channels");
  }

  Tensor tensor;
};

/// Homogeneous image collection plus a corruption record.
struct Dataset {
  std::vector<Image> items;
  std::map<std::string, std::string> metadata;

  void validate() const {
    if (items.empty()) throw ShapeError("dataset must be non-empty");
    for (const Image& im : items) {
      if (!im.tensor.same_shape(items.front().tensor)) {
        throw ShapeError("dataset images must share one shape");
      }
    }
  }
};

}  // namespace crrlearn
