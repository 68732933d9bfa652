#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "crrlearn/crr.hpp"

using namespace crrlearn;

namespace {

CRRParams random_params(std::uint64_t seed, bool use_diff = true, bool bias = true) {
  CRRParams p = CRRParams::init(1, 3, 4, 10, 0.01, use_diff, bias, seed);
  p.learn_scale = true;
  p.log_scale = 0.2;
  RngStream r(seed, 99);
  for (std::size_t i = 0; i < p.splines.d.size(); ++i) p.splines.d[i] = 0.3 + 1.5 * r.next_uniform();
  for (double& b : p.bias) b = 0.02 * r.next_normal();
  return p;
}

}  // namespace

TEST_CASE("unit slopes give the identity activation and quadratic potential") {
  SplineBank sb(2, 10, 0.01);
  for (double t : {0.0, 0.004, -0.03, 0.0999, -0.0999}) {
    REQUIRE(sb.sigma(0, t) == Catch::Approx(t).margin(1e-15));
    REQUIRE(sb.psi(1, t) == Catch::Approx(0.5 * t * t).margin(1e-15));
  }
}

TEST_CASE("activation saturates outside the knot range") {
  SplineBank sb(1, 10, 0.01);
  // Beyond the last knot the slope stays at d_K, so sigma grows linearly.
  double inside = sb.sigma(0, 0.1);
  REQUIRE(sb.sigma(0, 0.25) == Catch::Approx(inside + 0.15));
  REQUIRE(sb.sigma(0, -0.25) == Catch::Approx(-inside - 0.15));
}

TEST_CASE("potential is the integral of the activation") {
  RngStream r(31, 0);
  SplineBank sb(1, 10, 0.01);
  for (int probe = 0; probe < 100; ++probe) {
    for (std::size_t i = 0; i < sb.d.size(); ++i) sb.d[i] = 0.1 + 3.0 * r.next_uniform();
    double t = (r.next_uniform() - 0.5) * 0.5;
    // Composite Simpson quadrature of sigma from 0 to t.
    const std::size_t panels = 10000;
    double h = t / double(panels);
    double acc = sb.sigma(0, 0.0) + sb.sigma(0, t);
    for (std::size_t k = 1; k < panels; ++k) {
      acc += (k % 2 ? 4.0 : 2.0) * sb.sigma(0, double(k) * h);
    }
    acc *= h / 3.0;
    REQUIRE(std::fabs(acc - sb.psi(0, t)) <= 1e-9);
  }
}

TEST_CASE("potential slope derivatives match finite differences") {
  RngStream r(32, 0);
  SplineBank sb(1, 10, 0.01);
  for (std::size_t i = 0; i < sb.d.size(); ++i) sb.d[i] = 0.2 + 2.0 * r.next_uniform();
  for (double t : {0.034, -0.052, 0.17, -0.21, 0.0049}) {
    Tensor grad(sb.d.shape());
    sb.accumulate_psi_slope_grad(0, t, 1.0, grad);
    for (std::size_t i = 0; i < sb.d.size(); ++i) {
      double h = 1e-7, keep = sb.d[i];
      sb.d[i] = keep + h;
      double up = sb.psi(0, t);
      sb.d[i] = keep - h;
      double dn = sb.psi(0, t);
      sb.d[i] = keep;
      REQUIRE(grad[i] == Catch::Approx((up - dn) / (2 * h)).margin(1e-7));
    }
  }
}

TEST_CASE("regularizer gradients match finite differences in every group") {
  CRRParams p = random_params(40);
  RngStream r(41, 0);
  Tensor x = sample_std_normal(r, {1, 8, 8});
  x *= 0.05;
  const double h = 1e-6;

  SECTION("input gradient") {
    Tensor g = g_grad_x(p, x);
    for (int probe = 0; probe < 15; ++probe) {
      std::size_t i = r.next_u64() % x.size();
      Tensor xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fd = (g_forward(p, xp) - g_forward(p, xm)) / (2 * h);
      REQUIRE(g[i] == Catch::Approx(fd).epsilon(1e-5).margin(1e-9));
    }
  }

  SECTION("parameter gradient, all five groups") {
    auto [g, value] = g_grad_theta_value(p, x);
    REQUIRE(value == Catch::Approx(g_forward(p, x)));
    auto fd_of = [&](double* slot) {
      double keep = *slot;
      *slot = keep + h;
      double up = g_forward(p, x);
      *slot = keep - h;
      double dn = g_forward(p, x);
      *slot = keep;
      return (up - dn) / (2 * h);
    };
    for (int probe = 0; probe < 10; ++probe) {
      std::size_t i = r.next_u64() % p.conv1.weights.size();
      REQUIRE(g.conv1[i] == Catch::Approx(fd_of(&p.conv1.weights[i])).epsilon(1e-5).margin(1e-9));
      std::size_t j = r.next_u64() % p.conv2.weights.size();
      REQUIRE(g.conv2[j] == Catch::Approx(fd_of(&p.conv2.weights[j])).epsilon(1e-5).margin(1e-9));
      std::size_t k = r.next_u64() % p.splines.d.size();
      REQUIRE(g.d[k] == Catch::Approx(fd_of(&p.splines.d[k])).epsilon(1e-5).margin(1e-9));
    }
    for (std::size_t c = 0; c < p.bias.size(); ++c) {
      REQUIRE(g.bias[c] == Catch::Approx(fd_of(&p.bias[c])).epsilon(1e-5).margin(1e-9));
    }
    REQUIRE(g.log_scale == Catch::Approx(fd_of(&p.log_scale)).epsilon(1e-5));
  }
}

TEST_CASE("regularizer is midpoint convex") {
  CRRParams p = random_params(50);
  RngStream r(51, 0);
  for (int probe = 0; probe < 100; ++probe) {
    Tensor a = sample_std_normal(r, {1, 6, 6});
    Tensor b = sample_std_normal(r, {1, 6, 6});
    a *= 0.1;
    b *= 0.1;
    Tensor mid = a;
    mid += b;
    mid *= 0.5;
    REQUIRE(g_forward(p, mid) <= 0.5 * (g_forward(p, a) + g_forward(p, b)) + 1e-9);
  }
}

TEST_CASE("projection clamps slopes, bounds conv norms, and is idempotent") {
  CRRParams p = random_params(60);
  p.splines.d[3] = -2.0;
  p.splines.d[7] = 9.0;
  p.conv1.weights *= 1e4;
  project_params(p);
  for (std::size_t i = 0; i < p.splines.d.size(); ++i) {
    REQUIRE(p.splines.d[i] >= p.splines.m_min);
    REQUIRE(p.splines.d[i] <= p.splines.m_max);
  }
  REQUIRE(p.conv1.weights.norm2() <= p.r_theta * (1.0 + 1e-12));
  CRRParams q = p;
  project_params(q);
  REQUIRE(q.conv1.weights.dot(q.conv1.weights) == p.conv1.weights.dot(p.conv1.weights));
  for (std::size_t i = 0; i < q.splines.d.size(); ++i) REQUIRE(q.splines.d[i] == p.splines.d[i]);
}

TEST_CASE("spectral bound matches a dense eigensolve oracle") {
  CRRParams p = random_params(70);
  const std::size_t H = 5, W = 5, n = H * W;
  // Dense (WP)'(WP) assembled column by column.
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (std::size_t col = 0; col < n; ++col) {
    Tensor e({1, H, W});
    e[col] = 1.0;
    Tensor xp = LinearOperator::finite_difference(e.shape()).apply(e);
    Tensor u = p.conv2.forward(p.conv1.forward(xp));
    Tensor gh = p.conv1.adjoint(p.conv2.adjoint(u, H, W), H, W);
    Tensor back = LinearOperator::finite_difference(e.shape()).adjoint(gh);
    for (std::size_t row = 0; row < n; ++row) M[row][col] = back[row];
  }
  // Cyclic Jacobi eigenvalue sweep (independent of the power iteration).
  for (int sweep = 0; sweep < 50; ++sweep) {
    for (std::size_t pq = 0; pq < n; ++pq) {
      for (std::size_t q = pq + 1; q < n; ++q) {
        double apq = M[pq][q];
        if (std::fabs(apq) < 1e-14) continue;
        double phi = 0.5 * std::atan2(2 * apq, M[q][q] - M[pq][pq]);
        double c = std::cos(phi), s = std::sin(phi);
        for (std::size_t k = 0; k < n; ++k) {
          double mkp = M[k][pq], mkq = M[k][q];
          M[k][pq] = c * mkp - s * mkq;
          M[k][q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double mpk = M[pq][k], mqk = M[q][k];
          M[pq][k] = c * mpk - s * mqk;
          M[q][k] = s * mpk + c * mqk;
        }
      }
    }
  }
  double lambda_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) lambda_max = std::max(lambda_max, M[i][i]);
  SpectralEstimate sp = spectral_norm_westimate(p, H, W);
  REQUIRE(sp.op_norm * sp.op_norm == Catch::Approx(lambda_max).epsilon(1e-5));
  REQUIRE(lipschitz_bound(p, H, W) ==
          Catch::Approx(std::exp(p.log_scale) * p.splines.m_max * lambda_max).epsilon(1e-5));
}

TEST_CASE("initialization and bookkeeping") {
  CRRParams p = CRRParams::init(3, 8, 32, 10, 0.01, true, true, 1);
  REQUIRE(p.conv1.in_ch == 6);  // differences double the channel count
  REQUIRE(p.conv1.weights.size() == 8 * 6 * 49);
  REQUIRE(p.conv2.weights.size() == 32 * 8 * 49);
  REQUIRE(p.splines.d.size() == 32 * 20);
  REQUIRE(p.parameter_count() ==
          p.conv1.weights.size() + p.conv2.weights.size() + 32 * 20 + 32);
  // Fresh slopes are all one and filters have roughly unit output scale.
  for (std::size_t i = 0; i < p.splines.d.size(); ++i) REQUIRE(p.splines.d[i] == 1.0);
  double var = p.conv1.weights.dot(p.conv1.weights) / double(p.conv1.weights.size());
  REQUIRE(var == Catch::Approx(1.0 / (6 * 49)).epsilon(0.2));
}
