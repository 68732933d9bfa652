#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "crrlearn/checkpoint.hpp"
#include "crrlearn/crr.hpp"
#include "crrlearn/likelihood.hpp"
#include "crrlearn/sampler.hpp"

namespace crrlearn {

/// Stochastic-approximation trainer settings. delta is resolved as
/// delta0 / pixel_count unless given absolutely, which keeps parameter
/// update magnitudes resolution-independent.
struct SAPGConfig {
  double delta0 = 1.0;           // numerator of the default delta scaling
  double delta_absolute = 0.0;   // > 0 overrides the delta0/d rule
  std::size_t m_n = 1;           // chain steps per outer iteration
  std::size_t iterations = 0;    // N
  double gamma = 1e-4;           // posterior chain step size
  double gamma_prime = 1e-4;     // prior chain step size
  std::size_t batches = 1;       // B; 1 recovers the single-set algorithm
  bool reflected_posterior = false;
  bool reflected_prior = false;
  std::size_t checkpoint_every = 500;
  std::uint64_t seed = 0;
  // The accumulated update counts the prior gradient once per batch index
  // (B times in total); this flag rescales that term by 1/B instead.
  bool normalize_prior_weight = false;
  // Per-parameter-group step multipliers.
  double conv_step_scale = 1.0;
  double spline_step_scale = 1.0;
  double bias_step_scale = 1.0;
  std::string checkpoint_dir;  // empty disables on-disk checkpoints

  double resolved_delta(std::size_t pixel_count) const {
    if (delta_absolute > 0.0) return delta_absolute;
    return delta0 / double(pixel_count);
  }
};

/// Regularizer family with scalar parameter theta, g(x) = theta |x|^2 / 2.
/// Exercises the trainer against closed-form conjugate-model answers.
struct ScalarQuadraticModel {
  using Params = double;
  using Grad = double;

  double theta_min = 1e-8;
  double theta_max = 1e8;

  Grad zero(const Params&) const { return 0.0; }
  Tensor grad_x(const Params& theta, const Tensor& x) const { return x * theta; }
  std::pair<Grad, double> grad_theta(const Params& theta, const Tensor& x) const {
    double half_sq = 0.5 * x.dot(x);
    return {half_sq, theta * half_sq};
  }
  void accumulate(Grad& acc, double s, const Grad& g) const { acc += s * g; }
  bool finite(const Grad& g) const { return std::isfinite(g); }
  void step(Params& theta, const Grad& g, double scale, const SAPGConfig&) const {
    theta += scale * g;
    theta = theta < theta_min ? theta_min : (theta > theta_max ? theta_max : theta);
  }
  void save(const Params&, std::uint64_t, std::uint64_t, const std::string&) const {}
};

/// The convolutional ridge regularizer as a trainer model.
struct CrrModel {
  using Params = CRRParams;
  using Grad = ThetaGradient;

  Grad zero(const Params& p) const { return p.zero_gradient(); }
  Tensor grad_x(const Params& p, const Tensor& x) const { return g_grad_x(p, x); }
  std::pair<Grad, double> grad_theta(const Params& p, const Tensor& x) const {
    return g_grad_theta_value(p, x);
  }
  void accumulate(Grad& acc, double s, const Grad& g) const { acc.axpy(s, g); }
  bool finite(const Grad& g) const {
    if (!g.conv1.all_finite() || !g.conv2.all_finite() || !g.d.all_finite()) return false;
    for (double b : g.bias) {
      if (!std::isfinite(b)) return false;
    }
    return std::isfinite(g.log_scale);
  }
  void step(Params& p, const Grad& g, double scale, const SAPGConfig& cfg) const {
    p.conv1.weights.axpy(scale * cfg.conv_step_scale, g.conv1);
    p.conv2.weights.axpy(scale * cfg.conv_step_scale, g.conv2);
    p.splines.d.axpy(scale * cfg.spline_step_scale, g.d);
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      p.bias[i] += scale * cfg.bias_step_scale * g.bias[i];
    }
    if (p.learn_scale) p.log_scale += scale * g.log_scale;
    project_params(p);
  }
  void save(const Params& p, std::uint64_t iteration, std::uint64_t seed,
            const std::string& dir) const {
    std::filesystem::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof(name), "ckpt_%08llu.crrckpt", (unsigned long long)iteration);
    checkpoint_write(dir + "/" + name, Checkpoint{p, iteration, seed});
  }
};

template <typename Params>
struct TrainState {
  Params params{};
  std::vector<std::vector<Tensor>> posterior;  // B stacks of M/B images
  std::vector<Tensor> prior;                   // one stack of M/B images
  std::size_t iteration = 0;
  std::vector<double> loss_trace;  // per-image mean g(posterior) - g(prior)
  bool diverged = false;
  std::string divergence_message;
};

/// One projected stochastic gradient ascent step on the marginal
/// likelihood: theta <- project(theta + (delta/m_n) sum_b sum_k
/// [grad g(prior sample) - grad g(posterior sample of batch b)]).
/// The accumulation runs batch index ascending for reproducibility.
template <typename Model>
typename Model::Params soul_step(const Model& model, typename Model::Params theta,
                                 const std::vector<Tensor>& prior_samples,
                                 const std::vector<std::vector<Tensor>>& posterior_samples,
                                 double delta, std::size_t m_n, const SAPGConfig& cfg,
                                 std::size_t iteration_context = 0) {
  typename Model::Grad prior_acc = model.zero(theta);
  for (const Tensor& xb : prior_samples) {
    model.accumulate(prior_acc, 1.0, model.grad_theta(theta, xb).first);
  }
  std::size_t B = posterior_samples.size();
  double prior_weight = cfg.normalize_prior_weight ? 1.0 : double(B);
  typename Model::Grad acc = model.zero(theta);
  model.accumulate(acc, prior_weight, prior_acc);
  for (std::size_t b = 0; b < B; ++b) {
    for (const Tensor& x : posterior_samples[b]) {
      model.accumulate(acc, -1.0, model.grad_theta(theta, x).first);
    }
  }
  if (!model.finite(acc)) {
    throw std::runtime_error("non-finite parameter gradient at iteration " +
                             std::to_string(iteration_context));
  }
  model.step(theta, acc, delta / double(m_n), cfg);
  return theta;
}

/// Full training loop. likelihoods holds one entry per measurement image
/// (M total, split into cfg.batches contiguous stacks); posterior_init
/// matches likelihoods; prior_init supplies the M/B prior-chain images.
/// Every chain owns a counter-based RNG stream keyed off cfg.seed, so the
/// run is bitwise reproducible. On divergence the last on-disk checkpoint
/// is retained and the state is returned with diverged=true.
template <typename Model>
TrainState<typename Model::Params> train(const Model& model, const SAPGConfig& cfg,
                                         const std::vector<const Likelihood*>& likelihoods,
                                         typename Model::Params theta0,
                                         const std::vector<Tensor>& posterior_init,
                                         const std::vector<Tensor>& prior_init,
                                         const std::function<void(const TrainState<typename Model::Params>&)>&
                                             on_iteration = {}) {
  std::size_t M = likelihoods.size();
  std::size_t B = cfg.batches;
  if (M == 0 || B == 0 || M % B != 0) {
    throw ShapeError("measurement count must be a positive multiple of the batch count");
  }
  std::size_t s = M / B;
  if (posterior_init.size() != M || prior_init.size() != s) {
    throw ShapeError("chain initialization does not match measurement layout");
  }

  TrainState<typename Model::Params> st;
  st.params = std::move(theta0);
  st.prior = prior_init;
  st.posterior.resize(B);
  std::vector<RngStream> prior_rng, post_rng;
  std::vector<std::uint64_t> prior_steps(s, 0), post_steps(M, 0);
  for (std::size_t j = 0; j < s; ++j) prior_rng.emplace_back(cfg.seed, j);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t j = 0; j < s; ++j) {
      st.posterior[b].push_back(posterior_init[b * s + j]);
      post_rng.emplace_back(cfg.seed, s + b * s + j);
    }
  }
  std::size_t pixel_count = posterior_init[0].size();
  double delta = cfg.resolved_delta(pixel_count);

  std::vector<Tensor> prior_samples;
  std::vector<std::vector<Tensor>> posterior_samples(B);
  try {
    for (std::size_t n = 0; n < cfg.iterations; ++n) {
      prior_samples.clear();
      for (std::size_t k = 0; k < cfg.m_n; ++k) {
        for (std::size_t j = 0; j < s; ++j) {
          Tensor g = model.grad_x(st.params, st.prior[j]);
          Tensor z = sample_std_normal(prior_rng[j], st.prior[j].shape());
          st.prior[j] = ula_update(st.prior[j], g, cfg.gamma_prime, z, cfg.reflected_prior,
                                   ++prior_steps[j]);
          prior_samples.push_back(st.prior[j]);
        }
      }
      for (std::size_t b = 0; b < B; ++b) {
        posterior_samples[b].clear();
        for (std::size_t k = 0; k < cfg.m_n; ++k) {
          for (std::size_t j = 0; j < s; ++j) {
            std::size_t gi = b * s + j;
            Tensor& x = st.posterior[b][j];
            Tensor g = likelihoods[gi]->grad(x);
            g += model.grad_x(st.params, x);
            Tensor z = sample_std_normal(post_rng[gi], x.shape());
            x = ula_update(x, g, cfg.gamma, z, cfg.reflected_posterior, ++post_steps[gi]);
            posterior_samples[b].push_back(x);
          }
        }
      }

      // Monitor: per-image mean of g on posterior vs prior samples.
      double post_g = 0.0, prior_g = 0.0;
      typename Model::Grad prior_acc = model.zero(st.params);
      for (const Tensor& xb : prior_samples) {
        auto [g, v] = model.grad_theta(st.params, xb);
        prior_g += v;
        model.accumulate(prior_acc, 1.0, g);
      }
      double prior_weight = cfg.normalize_prior_weight ? 1.0 : double(B);
      typename Model::Grad acc = model.zero(st.params);
      model.accumulate(acc, prior_weight, prior_acc);
      for (std::size_t b = 0; b < B; ++b) {
        for (const Tensor& x : posterior_samples[b]) {
          auto [g, v] = model.grad_theta(st.params, x);
          post_g += v;
          model.accumulate(acc, -1.0, g);
        }
      }
      if (!model.finite(acc)) {
        throw std::runtime_error("non-finite parameter gradient at iteration " +
                                 std::to_string(n));
      }
      model.step(st.params, acc, delta / double(cfg.m_n), cfg);
      st.loss_trace.push_back(post_g / double(M * cfg.m_n) - prior_g / double(s * cfg.m_n));
      st.iteration = n + 1;
      if (!cfg.checkpoint_dir.empty() &&
          ((n + 1) % cfg.checkpoint_every == 0 || n + 1 == cfg.iterations)) {
        model.save(st.params, n + 1, cfg.seed, cfg.checkpoint_dir);
      }
      if (on_iteration) on_iteration(st);
    }
  } catch (const ChainDiverged& e) {
    st.diverged = true;
    st.divergence_message = e.what();
  }
  return st;
}

/// Chain starting point matched to the likelihood: adjoint back-projection
/// for Gaussian measurements, rescaled counts for Poisson ones.
inline Tensor default_posterior_init(const Likelihood& lik) {
  if (const auto* g = dynamic_cast<const GaussianLikelihood*>(&lik)) {
    return g->op().adjoint(g->y());
  }
  if (const auto* p = dynamic_cast<const PoissonLikelihood*>(&lik)) {
    Tensor x = p->y();
    x *= 1.0 / p->eta();
    return x;
  }
  throw std::runtime_error("no default chain initialization for this likelihood");
}

/// Pre-training parameter fit: descend
///   L(theta) = (1/M) sum_i [g(clean_i) - g(noisy_i)] + max(1, L_bound(theta))
/// so the regularizer scores clean images below their corruptions while its
/// gradient Lipschitz bound is pulled toward 1. The bound's gradient treats
/// the power-iteration singular vector as a constant per step.
inline CRRParams warmstart_adversarial(CRRParams theta, const Dataset& clean,
                                       const Dataset& noisy, std::size_t iters, double step,
                                       std::vector<double>* loss_out = nullptr) {
  clean.validate();
  noisy.validate();
  if (clean.items.size() != noisy.items.size() ||
      !clean.items[0].tensor.same_shape(noisy.items[0].tensor)) {
    throw ShapeError("warm start needs paired clean/noisy datasets");
  }
  std::size_t M = clean.items.size();
  std::size_t H = clean.items[0].height(), W = clean.items[0].width();
  SAPGConfig step_cfg;  // unit group scales
  CrrModel model;
  project_params(theta);
  for (std::size_t it = 0; it < iters; ++it) {
    ThetaGradient grad = theta.zero_gradient();
    double data_loss = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      auto [gc, vc] = g_grad_theta_value(theta, clean.items[i].tensor);
      auto [gn, vn] = g_grad_theta_value(theta, noisy.items[i].tensor);
      grad.axpy(1.0 / double(M), gc);
      grad.axpy(-1.0 / double(M), gn);
      data_loss += (vc - vn) / double(M);
    }
    SpectralEstimate sp = spectral_norm_westimate(theta, H, W);
    double lip = std::exp(theta.log_scale) * theta.splines.m_max * sp.op_norm * sp.op_norm;
    if (lip > 1.0) {
      // d/dw of |conv2(conv1(P v))|^2 at the frozen singular vector v.
      Tensor xp = theta.use_diff
                      ? LinearOperator::finite_difference(sp.top_vec.shape()).apply(sp.top_vec)
                      : sp.top_vec;
      Tensor h = theta.conv1.forward(xp);
      Tensor u = theta.conv2.forward(h);
      double c = std::exp(theta.log_scale) * theta.splines.m_max;
      grad.conv2.axpy(2.0 * c, theta.conv2.weight_grad(h, u));
      Tensor gh = theta.conv2.adjoint(u, H, W);
      grad.conv1.axpy(2.0 * c, theta.conv1.weight_grad(xp, gh));
      if (theta.learn_scale) grad.log_scale += lip;
    }
    if (loss_out) loss_out->push_back(data_loss + std::max(1.0, lip));
    model.step(theta, grad, -step, step_cfg);
  }
  return theta;
}

}  // namespace crrlearn
