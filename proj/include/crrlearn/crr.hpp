#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "crrlearn/conv.hpp"
#include "crrlearn/operators.hpp"
#include "crrlearn/prior.hpp"
#include "crrlearn/rng.hpp"
#include "crrlearn/tensor.hpp"

namespace crrlearn {

/// Per-channel linear-spline activations sigma = psi' on 2K+1 equispaced
/// knots t_k = k*delta. d stores the interval slopes of sigma: entry
/// (c, K-1-m) is the slope on [t_{-m-1}, t_{-m}] and entry (c, K+m) the
/// slope on [t_m, t_{m+1}]. Projection clamps slopes into [m_min, m_max],
/// which keeps sigma strictly increasing and psi strongly convex.
struct SplineBank {
  std::size_t channels = 0;
  std::size_t half_knots = 10;  // K; 2K+1 knots total
  double delta = 0.01;
  double m_min = 1e-3;
  double m_max = 5.0;
  Tensor d;  // (channels, 2K)

  SplineBank() = default;
  SplineBank(std::size_t C, std::size_t K, double dlt) : channels(C), half_knots(K), delta(dlt) {
    d = Tensor({C, 2 * K});
    d.fill(1.0);  // sigma(t) = t, quadratic psi
  }

  // Slope d_j for j in 1..K (positive side) or -1..-K (negative side).
  double slope(std::size_t c, long j) const {
    return d[c * 2 * half_knots + idx_(j)];
  }
  double& slope(std::size_t c, long j) { return d[c * 2 * half_knots + idx_(j)]; }

  double sigma(std::size_t c, double t) const {
    double s = std::fabs(t);
    long sign = t < 0.0 ? -1 : 1;
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t m = 1; m <= half_knots; ++m) {
      double dm = slope(c, sign * long(m));
      double r = s - double(m - 1) * delta;
      if (r <= 0.0) break;
      acc += (dm - prev) * r;
      prev = dm;
    }
    return double(sign) * acc;
  }

  double psi(std::size_t c, double t) const {
    double s = std::fabs(t);
    long sign = t < 0.0 ? -1 : 1;
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t m = 1; m <= half_knots; ++m) {
      double dm = slope(c, sign * long(m));
      double r = s - double(m - 1) * delta;
      if (r <= 0.0) break;
      acc += 0.5 * (dm - prev) * r * r;
      prev = dm;
    }
    return acc;
  }

  /// Accumulates d(psi_c(t))/d(d_j) * weight into grad (same layout as d).
  void accumulate_psi_slope_grad(std::size_t c, double t, double weight, Tensor& grad) const {
    double s = std::fabs(t);
    long sign = t < 0.0 ? -1 : 1;
    for (std::size_t m = 1; m <= half_knots; ++m) {
      double r0 = s - double(m - 1) * delta;
      if (r0 <= 0.0) break;
      double g = 0.5 * r0 * r0;
      if (m < half_knots) {
        double r1 = s - double(m)*delta;
        if (r1 > 0.0) g -= 0.5 * r1 * r1;
      }
      grad[c * 2 * half_knots + idx_(sign * long(m))] += weight * g;
    }
  }

 private:
  std::size_t idx_(long j) const {
    // j in -K..-1 maps to K-1..0 (so column 0 is d_{-K}), j in 1..K to K..2K-1.
    return j < 0 ? std::size_t(long(half_knots) + j) : std::size_t(long(half_knots) + j - 1);
  }
};

/// Gradient of the regularizer with respect to its learnable parameters.
struct ThetaGradient {
  Tensor conv1, conv2, d;
  std::vector<double> bias;
  double log_scale = 0.0;

  void axpy(double s, const ThetaGradient& o) {
    conv1.axpy(s, o.conv1);
    conv2.axpy(s, o.conv2);
    d.axpy(s, o.d);
    for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += s * o.bias[i];
    log_scale += s * o.log_scale;
  }

  void scale(double s) {
    conv1 *= s;
    conv2 *= s;
    d *= s;
    for (double& b : bias) b *= s;
    log_scale *= s;
  }

  double norm2() const {
    double acc = conv1.dot(conv1) + conv2.dot(conv2) + d.dot(d) + log_scale * log_scale;
    for (double b : bias) acc += b * b;
    return std::sqrt(acc);
  }
};

/// Convex ridge regularizer g(x) = e^c * sum_i psi_i((W P x + b)_i) with
/// W two zero-padded convolutions and P the identity or the forward
/// difference operator.
struct CRRParams {
  std::size_t in_ch = 1;   // image channels
  std::size_t mid_ch = 8;
  std::size_t num_ridges = 32;  // C
  bool use_diff = false;
  bool has_bias = false;
  bool learn_scale = false;
  double log_scale = 0.0;
  double r_theta = 100.0;  // Frobenius ball radius per conv stack

  ConvLayer conv1, conv2;
  SplineBank splines;
  std::vector<double> bias;

  static CRRParams init(std::size_t in_ch, std::size_t mid_ch, std::size_t num_ridges,
                        std::size_t half_knots, double knot_delta, bool use_diff, bool has_bias,
                        std::uint64_t seed) {
    CRRParams p;
    p.in_ch = in_ch;
    p.mid_ch = mid_ch;
    p.num_ridges = num_ridges;
    p.use_diff = use_diff;
    p.has_bias = has_bias;
    std::size_t c1_in = use_diff ? 2 * in_ch : in_ch;
    p.conv1 = ConvLayer(mid_ch, c1_in, 7);
    p.conv2 = ConvLayer(num_ridges, mid_ch, 7);
    p.splines = SplineBank(num_ridges, half_knots, knot_delta);
    p.bias.assign(has_bias ? num_ridges : 0, 0.0);
    RngStream rng(seed, 0x637272ULL);
    double s1 = 1.0 / std::sqrt(double(c1_in * 49));
    for (std::size_t i = 0; i < p.conv1.weights.size(); ++i) {
      p.conv1.weights[i] = s1 * rng.next_normal();
    }
    double s2 = 1.0 / std::sqrt(double(mid_ch * 49));
    for (std::size_t i = 0; i < p.conv2.weights.size(); ++i) {
      p.conv2.weights[i] = s2 * rng.next_normal();
    }
    return p;
  }

  std::size_t parameter_count() const {
    return conv1.weights.size() + conv2.weights.size() + splines.d.size() + bias.size() +
           (learn_scale ? 1 : 0);
  }

  ThetaGradient zero_gradient() const {
    ThetaGradient g;
    g.conv1 = Tensor(conv1.weights.shape());
    g.conv2 = Tensor(conv2.weights.shape());
    g.d = Tensor(splines.d.shape());
    g.bias.assign(bias.size(), 0.0);
    g.log_scale = 0.0;
    return g;
  }
};

namespace crr_detail {

inline Tensor prefix(const CRRParams& p, const Tensor& x) {
  if (!p.use_diff) return x;
  return LinearOperator::finite_difference(x.shape()).apply(x);
}

inline Tensor prefix_adjoint(const CRRParams& p, const Tensor& g,
                             const std::vector<std::size_t>& in_shape) {
  if (!p.use_diff) return g;
  return LinearOperator::finite_difference(in_shape).adjoint(g);
}

struct Features {
  Tensor xp;  // P x
  Tensor h;   // conv1(P x)
  Tensor u;   // conv2(conv1(P x))
};

inline Features feature_maps(const CRRParams& p, const Tensor& x) {
  Features f;
  f.xp = prefix(p, x);
  f.h = p.conv1.forward(f.xp);
  f.u = p.conv2.forward(f.h);
  return f;
}

}  // namespace crr_detail

inline double g_forward(const CRRParams& p, const Tensor& x) {
  crr_detail::Features f = crr_detail::feature_maps(p, x);
  std::size_t C = p.num_ridges, H = f.u.shape()[1], W = f.u.shape()[2];
  double acc = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    double b = p.has_bias ? p.bias[c] : 0.0;
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) acc += p.splines.psi(c, f.u.at3(c, i, j) + b);
    }
  }
  return std::exp(p.log_scale) * acc;
}

inline Tensor g_grad_x(const CRRParams& p, const Tensor& x) {
  crr_detail::Features f = crr_detail::feature_maps(p, x);
  std::size_t C = p.num_ridges, H = f.u.shape()[1], W = f.u.shape()[2];
  Tensor act({C, H, W});
  double scale = std::exp(p.log_scale);
  for (std::size_t c = 0; c < C; ++c) {
    double b = p.has_bias ? p.bias[c] : 0.0;
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) {
        act.at3(c, i, j) = scale * p.splines.sigma(c, f.u.at3(c, i, j) + b);
      }
    }
  }
  Tensor gh = p.conv2.adjoint(act, H, W);
  Tensor gx = p.conv1.adjoint(gh, H, W);
  return crr_detail::prefix_adjoint(p, gx, x.shape());
}

/// Parameter gradient plus the value g(x) (a free byproduct of the pass).
inline std::pair<ThetaGradient, double> g_grad_theta_value(const CRRParams& p, const Tensor& x) {
  crr_detail::Features f = crr_detail::feature_maps(p, x);
  std::size_t C = p.num_ridges, H = f.u.shape()[1], W = f.u.shape()[2];
  double scale = std::exp(p.log_scale);
  ThetaGradient g = p.zero_gradient();
  Tensor act({C, H, W});
  double total = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    double b = p.has_bias ? p.bias[c] : 0.0;
    double bias_acc = 0.0;
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) {
        double t = f.u.at3(c, i, j) + b;
        total += p.splines.psi(c, t);
        double s = p.splines.sigma(c, t);
        act.at3(c, i, j) = scale * s;
        bias_acc += s;
        p.splines.accumulate_psi_slope_grad(c, t, scale, g.d);
      }
    }
    if (p.has_bias) g.bias[c] = scale * bias_acc;
  }
  g.conv2 = p.conv2.weight_grad(f.h, act);
  Tensor gh = p.conv2.adjoint(act, H, W);
  g.conv1 = p.conv1.weight_grad(f.xp, gh);
  double value = scale * total;
  g.log_scale = p.learn_scale ? value : 0.0;
  return {std::move(g), value};
}

inline ThetaGradient g_grad_theta(const CRRParams& p, const Tensor& x) {
  return g_grad_theta_value(p, x).first;
}

/// Projection onto the feasible set: slope clamps plus a Frobenius-norm
/// ball per conv stack. Idempotent.
inline void project_params(CRRParams& p) {
  for (std::size_t i = 0; i < p.splines.d.size(); ++i) {
    double v = p.splines.d[i];
    p.splines.d[i] = v < p.splines.m_min ? p.splines.m_min : (v > p.splines.m_max ? p.splines.m_max : v);
  }
  for (ConvLayer* layer : {&p.conv1, &p.conv2}) {
    double n = layer->weights.norm2();
    // The slack absorbs rescaling round-off so a second projection is a
    // bitwise no-op.
    if (n > p.r_theta * (1.0 + 1e-12)) layer->weights *= p.r_theta / n;
  }
}

/// Top singular pair of the composed linear map W P on (in_ch, H, W)
/// images, by power iteration on (W P)^T (W P).
struct SpectralEstimate {
  double op_norm = 0.0;  // |W P|
  Tensor top_vec;        // unit right singular vector
};

inline SpectralEstimate spectral_norm_westimate(const CRRParams& p, std::size_t H, std::size_t W,
                                                double rel_tol = 1e-6,
                                                std::size_t max_iters = 10000) {
  std::vector<std::size_t> shape = {p.in_ch, H, W};
  RngStream rng(0x9e3779b9ULL, 0x706f77ULL);
  Tensor v = sample_std_normal(rng, shape);
  v *= 1.0 / v.norm2();
  double lambda = 0.0;
  auto wtw = [&](const Tensor& t) {
    Tensor xp = crr_detail::prefix(p, t);
    Tensor h = p.conv1.forward(xp);
    Tensor u = p.conv2.forward(h);
    Tensor gh = p.conv2.adjoint(u, H, W);
    Tensor gx = p.conv1.adjoint(gh, H, W);
    return crr_detail::prefix_adjoint(p, gx, shape);
  };
  for (std::size_t it = 0; it < max_iters; ++it) {
    Tensor w = wtw(v);
    double next = v.dot(w);
    double n = w.norm2();
    if (n == 0.0) return {0.0, v};  // zero map
    w *= 1.0 / n;
    v = std::move(w);
    if (it > 0 && std::fabs(next - lambda) <= rel_tol * std::fabs(next)) {
      return {std::sqrt(next), v};
    }
    lambda = next;
  }
  throw std::runtime_error("power iteration did not converge");
}

/// Upper bound e^c * m_max * |W P|^2 on the Lipschitz constant of grad g.
inline double lipschitz_bound(const CRRParams& p, std::size_t H, std::size_t W) {
  SpectralEstimate s = spectral_norm_westimate(p, H, W);
  return std::exp(p.log_scale) * p.splines.m_max * s.op_norm * s.op_norm;
}

/// Prior adapter over an immutable CRRParams snapshot.
class CrrPrior final : public Prior {
 public:
  explicit CrrPrior(CRRParams params, double weight = 1.0)
      : params_(std::move(params)), weight_(weight) {}
  double value(const Tensor& x) const override { return weight_ * g_forward(params_, x); }
  Tensor grad(const Tensor& x) const override {
    Tensor g = g_grad_x(params_, x);
    g *= weight_;
    return g;
  }
  const CRRParams& params() const { return params_; }

 private:
  CRRParams params_;
  double weight_;
};

}  // namespace crrlearn
