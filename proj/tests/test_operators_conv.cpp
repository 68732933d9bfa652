#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "crrlearn/conv.hpp"
#include "crrlearn/operators.hpp"
#include "crrlearn/rng.hpp"

using namespace crrlearn;

namespace {

// Independent reference: literal cross-correlation with explicit
// zero-padding, no loop-bound tricks.
Tensor naive_conv(const ConvLayer& layer, const Tensor& x) {
  std::size_t H = x.shape()[1], W = x.shape()[2];
  long ctr = long(layer.k) / 2;
  Tensor y({layer.out_ch, H, W});
  for (std::size_t o = 0; o < layer.out_ch; ++o) {
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < layer.in_ch; ++m) {
          for (std::size_t a = 0; a < layer.k; ++a) {
            for (std::size_t b = 0; b < layer.k; ++b) {
              long ii = long(i) + long(a) - ctr, jj = long(j) + long(b) - ctr;
              if (ii < 0 || jj < 0 || ii >= long(H) || jj >= long(W)) continue;
              acc += layer.w(o, m, a, b) * x.at3(m, std::size_t(ii), std::size_t(jj));
            }
          }
        }
        y.at3(o, i, j) = acc;
      }
    }
  }
  return y;
}

}  // namespace

TEST_CASE("conv layer matches the naive reference") {
  RngStream r(21, 0);
  ConvLayer layer(3, 2, 5);
  for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = r.next_normal();
  Tensor x = sample_std_normal(r, {2, 6, 6});
  Tensor fast = layer.forward(x);
  Tensor slow = naive_conv(layer, x);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    REQUIRE(fast[i] == Catch::Approx(slow[i]).margin(1e-12));
  }
}

TEST_CASE("conv layer adjoint and weight gradient satisfy the duality identities") {
  RngStream r(22, 0);
  ConvLayer layer(2, 3, 7);
  for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = r.next_normal();
  Tensor x = sample_std_normal(r, {3, 9, 8});
  Tensor y = sample_std_normal(r, {2, 9, 8});
  // <Kx, y> = <x, K'y>
  double lhs = layer.forward(x).dot(y);
  REQUIRE(lhs == Catch::Approx(x.dot(layer.adjoint(y, 9, 8))).epsilon(1e-12));
  // <Kx, y> = <w, weight_grad(x, y)> since forward is linear in w too.
  REQUIRE(lhs == Catch::Approx(layer.weights.dot(layer.weight_grad(x, y))).epsilon(1e-12));
  REQUIRE_THROWS_AS(ConvLayer(1, 1, 4), ShapeError);
}

TEST_CASE("blur kernels") {
  Kernel g = gaussian_blur_kernel(5, 1.0);
  REQUIRE(g.weights.sum() == Catch::Approx(1.0));
  // Center dominates and symmetry holds.
  REQUIRE(g.weights[2 * 5 + 2] > g.weights[0]);
  REQUIRE(g.weights[0] == Catch::Approx(g.weights[24]));
  Kernel u = uniform_blur_kernel(3);
  REQUIRE(u.weights[4] == Catch::Approx(1.0 / 9.0));
  REQUIRE_THROWS_AS(gaussian_blur_kernel(4, 1.0), ShapeError);
  REQUIRE_THROWS_AS(gaussian_blur_kernel(5, 0.0), ShapeError);
}

TEST_CASE("delta kernel convolution is the identity") {
  RngStream r(23, 0);
  Tensor x = sample_std_normal(r, {1, 5, 5});
  LinearOperator op = LinearOperator::conv2d(x.shape(), delta_kernel(3));
  Tensor y = op.apply(x);
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y[i] == Catch::Approx(x[i]).margin(1e-15));
}

TEST_CASE("finite difference operator follows the forward convention") {
  Tensor x({1, 2, 3}, {0.0, 1.0, 3.0, 2.0, 2.0, 2.0});
  LinearOperator d = LinearOperator::finite_difference(x.shape());
  Tensor y = d.apply(x);
  REQUIRE(y.shape() == std::vector<std::size_t>{2, 2, 3});
  // Horizontal channel: x[i,j+1]-x[i,j], zero last column.
  REQUIRE(y.at3(0, 0, 0) == 1.0);
  REQUIRE(y.at3(0, 0, 1) == 2.0);
  REQUIRE(y.at3(0, 0, 2) == 0.0);
  // Vertical channel: x[i+1,j]-x[i,j], zero last row.
  REQUIRE(y.at3(1, 0, 0) == 2.0);
  REQUIRE(y.at3(1, 0, 2) == -1.0);
  REQUIRE(y.at3(1, 1, 1) == 0.0);
}

TEST_CASE("mask operator keeps only the selected pixels and is self-adjoint") {
  Tensor m({1, 2, 2}, {1.0, 0.0, 0.0, 1.0});
  LinearOperator op = LinearOperator::mask(m);
  Tensor x({1, 2, 2}, {5.0, 6.0, 7.0, 8.0});
  Tensor y = op.apply(x);
  REQUIRE(y[0] == 5.0);
  REQUIRE(y[1] == 0.0);
  REQUIRE(y[3] == 8.0);
  // Diagonal 0/1 operator is its own adjoint.
  for (std::size_t i = 0; i < y.size(); ++i) REQUIRE(op.adjoint(x)[i] == y[i]);
}

TEST_CASE("random mask realizes approximately the requested keep fraction") {
  LinearOperator op = LinearOperator::random_mask({1, 64, 64}, 0.8, 5);
  REQUIRE(op.mask_tensor().mean() == Catch::Approx(0.8).margin(0.03));
  // Deterministic in the seed.
  LinearOperator op2 = LinearOperator::random_mask({1, 64, 64}, 0.8, 5);
  for (std::size_t i = 0; i < op.mask_tensor().size(); ++i) {
    REQUIRE(op.mask_tensor()[i] == op2.mask_tensor()[i]);
  }
}

TEST_CASE("adjoint dot test across all operator kinds") {
  RngStream r(24, 0);
  std::vector<std::size_t> shape = {3, 7, 6};
  std::vector<LinearOperator> ops;
  ops.push_back(LinearOperator::identity(shape));
  ops.push_back(LinearOperator::conv2d(shape, gaussian_blur_kernel(5, 1.0)));
  ops.push_back(LinearOperator::conv2d(shape, uniform_blur_kernel(3)));
  ops.push_back(LinearOperator::random_mask(shape, 0.6, 2));
  ops.push_back(LinearOperator::finite_difference(shape));
  for (const LinearOperator& op : ops) {
    for (int probe = 0; probe < 20; ++probe) {
      Tensor a = sample_std_normal(r, op.input_shape());
      Tensor b = sample_std_normal(r, op.output_shape());
      double lhs = op.apply(a).dot(b);
      double rhs = a.dot(op.adjoint(b));
      REQUIRE(std::fabs(lhs - rhs) <= 1e-10 * std::max({1.0, std::fabs(lhs), std::fabs(rhs)}));
    }
  }
}
