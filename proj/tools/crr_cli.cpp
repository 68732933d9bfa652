// Command-line front door: dataset corruption, regularizer training,
// posterior-mean / MAP / TV reconstruction, metric reports, and a
// self-check battery. Flat key=value configs; --key=value overrides win.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "crrlearn/crrlearn.hpp"

namespace {

using namespace crrlearn;

void write_run_log(const std::string& dir, const std::string& subcommand, const Config& cfg) {
  std::filesystem::create_directories(dir);
  detail::write_file(dir + "/run.log", "subcommand = " + subcommand + "\n" + cfg.echo_consumed());
}

std::string item_name(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "item_%04zu", n);
  return buf;
}

LinearOperator operator_from_config(const Config& cfg, const std::vector<std::size_t>& shape) {
  std::string kind = cfg.get_string("operator", "identity");
  if (kind == "identity") return LinearOperator::identity(shape);
  if (kind == "blur") {
    std::size_t size = std::size_t(cfg.get_int("kernel_size", 5));
    double strength = cfg.get_double("blur_strength", 1.0);
    return LinearOperator::conv2d(shape, gaussian_blur_kernel(size, strength));
  }
  if (kind == "uniform_blur") {
    return LinearOperator::conv2d(shape, uniform_blur_kernel(std::size_t(cfg.get_int("kernel_size", 5))));
  }
  if (kind == "mask") {
    double keep = cfg.get_double("keep_prob", 0.8);
    std::uint64_t seed = std::uint64_t(cfg.get_int("seed", 0));
    return LinearOperator::random_mask(shape, keep, seed);
  }
  throw ConfigError("unknown operator: " + kind);
}

LinearOperator operator_from_metadata(const Dataset& ds, const std::vector<std::size_t>& shape) {
  Config meta;
  for (const auto& [k, v] : ds.metadata) {
    if (known_config_keys().count(k)) meta.set(k, v);
  }
  return operator_from_config(meta, shape);
}

std::unique_ptr<Likelihood> likelihood_from_metadata(const Dataset& noisy, std::size_t index,
                                                     const LinearOperator& op) {
  const Tensor& y = noisy.items[index].tensor;
  std::string noise = noisy.metadata.count("noise") ? noisy.metadata.at("noise") : "gaussian";
  if (noise == "gaussian") {
    double sigma = std::stod(noisy.metadata.at("sigma"));
    return std::make_unique<GaussianLikelihood>(op, y, sigma);
  }
  if (noise == "poisson") {
    double miv = std::stod(noisy.metadata.at("miv"));
    double eta = std::stod(noisy.metadata.at("eta_" + std::to_string(index)));
    return std::make_unique<PoissonLikelihood>(y, eta, miv / 100.0);
  }
  throw ConfigError("dataset has unknown noise kind: " + noise);
}

// ---------------------------------------------------------------- corrupt

int cmd_corrupt(const Config& cfg) {
  std::string out = cfg.get_string("out");
  if (out.empty()) throw ConfigError("corrupt needs out=<dir>");
  std::uint64_t seed = std::uint64_t(cfg.get_int("seed", 0));

  Dataset clean;
  std::string in = cfg.get_string("in");
  if (in.empty()) {
    clean = synthetic_blobs(std::size_t(cfg.get_int("count", 8)),
                            std::size_t(cfg.get_int("channels", 1)),
                            std::size_t(cfg.get_int("height", 16)),
                            std::size_t(cfg.get_int("width", 16)), seed);
    dataset_write(out + "_clean", clean);
  } else {
    clean = dataset_read(in);
  }

  std::string noise = cfg.get_string("noise", "gaussian");
  Dataset noisy;
  if (noise == "gaussian") {
    LinearOperator op = operator_from_config(cfg, clean.items[0].tensor.shape());
    noisy = corrupt_gaussian(clean, op, cfg.get_double("sigma", 0.05), seed);
    // Record enough to rebuild the operator downstream.
    noisy.metadata["operator"] = cfg.get_string("operator", "identity");
    if (noisy.metadata["operator"] == "blur" || noisy.metadata["operator"] == "uniform_blur") {
      noisy.metadata["kernel_size"] = std::to_string(cfg.get_int("kernel_size", 5));
      noisy.metadata["blur_strength"] = to_precise_string(cfg.get_double("blur_strength", 1.0));
    } else if (noisy.metadata["operator"] == "mask") {
      noisy.metadata["keep_prob"] = to_precise_string(cfg.get_double("keep_prob", 0.8));
    }
  } else if (noise == "poisson") {
    noisy = corrupt_poisson(clean, cfg.get_double("miv", 25.0), seed);
    noisy.metadata["operator"] = "identity";
  } else {
    throw ConfigError("unknown noise kind: " + noise);
  }
  dataset_write(out, noisy);
  write_run_log(out, "corrupt", cfg);
  return 0;
}

// ------------------------------------------------------------------ train

int cmd_train(const Config& cfg) {
  std::string in = cfg.get_string("in");
  std::string out = cfg.get_string("out");
  if (in.empty() || out.empty()) throw ConfigError("train needs in=<dir> out=<dir>");
  Dataset noisy = dataset_read(in);
  std::string noise = noisy.metadata.count("noise") ? noisy.metadata.at("noise") : "gaussian";
  bool poisson = noise == "poisson";

  const std::vector<std::size_t>& yshape = noisy.items[0].tensor.shape();
  LinearOperator op = operator_from_metadata(noisy, yshape);
  std::vector<std::unique_ptr<Likelihood>> liks;
  std::vector<const Likelihood*> lik_ptrs;
  for (std::size_t n = 0; n < noisy.items.size(); ++n) {
    liks.push_back(likelihood_from_metadata(noisy, n, op));
    lik_ptrs.push_back(liks.back().get());
  }

  SAPGConfig sc;
  sc.gamma = cfg.get_double("gamma", poisson ? 5e-6 : 1e-4);
  sc.gamma_prime = cfg.get_double("gamma_prime", poisson ? 1e-5 : 1e-4);
  sc.delta0 = cfg.get_double("delta0", 0.01);
  sc.delta_absolute = cfg.get_double("delta", 0.0);
  sc.m_n = std::size_t(cfg.get_int("m_n", 1));
  sc.iterations = std::size_t(cfg.get_int("iterations", 1000));
  sc.batches = std::size_t(cfg.get_int("B", 1));
  sc.reflected_posterior = cfg.get_string("kernel_posterior", poisson ? "rula" : "ula") == "rula";
  sc.reflected_prior = cfg.get_string("kernel_prior", poisson ? "rula" : "ula") == "rula";
  sc.checkpoint_every = std::size_t(cfg.get_int("checkpoint_every", 500));
  sc.seed = std::uint64_t(cfg.get_int("seed", 0));
  sc.normalize_prior_weight = cfg.get_bool("normalize_prior", false);
  sc.conv_step_scale = cfg.get_double("conv_step_scale", 1.0);
  sc.spline_step_scale = cfg.get_double("spline_step_scale", 1.0);
  sc.bias_step_scale = cfg.get_double("bias_step_scale", 1.0);
  sc.checkpoint_dir = out;

  std::size_t in_ch = yshape[0];
  CRRParams theta = CRRParams::init(
      in_ch, std::size_t(cfg.get_int("mid_ch", 8)), std::size_t(cfg.get_int("num_ridges", 32)),
      std::size_t(cfg.get_int("spline_knots", 10)), cfg.get_double("knot_delta", 0.01),
      cfg.get_bool("use_diff", true), cfg.get_bool("use_bias", false), sc.seed);
  theta.learn_scale = cfg.get_bool("learn_scale", false);
  project_params(theta);

  std::vector<Tensor> post_init;
  for (const auto* l : lik_ptrs) post_init.push_back(default_posterior_init(*l));

  std::size_t warm_iters = std::size_t(cfg.get_int("warmstart_iters", 0));
  if (warm_iters > 0) {
    // Adversarial pre-fit against self-corrupted copies of the first few
    // training measurements.
    std::size_t warm_count =
        std::min(post_init.size(), std::size_t(cfg.get_int("warmstart_count", 8)));
    Dataset wclean, wnoisy;
    RngStream wrng(sc.seed, 0x7761726dULL);
    for (std::size_t n = 0; n < warm_count; ++n) {
      Tensor base = post_init[n];
      Tensor pert = base;
      pert.axpy(0.1, sample_std_normal(wrng, base.shape()));
      wclean.items.emplace_back(std::move(base));
      wnoisy.items.emplace_back(std::move(pert));
    }
    theta = warmstart_adversarial(theta, wclean, wnoisy, warm_iters,
                                  cfg.get_double("warmstart_step", 1e-3));
  }

  std::size_t s = post_init.size() / sc.batches;
  std::vector<Tensor> prior_init;
  RngStream prng(sc.seed, 0x7072696fULL);
  for (std::size_t j = 0; j < s; ++j) {
    Tensor x = post_init[j];
    x.axpy(0.1, sample_std_normal(prng, x.shape()));
    if (sc.reflected_prior) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::fabs(x[i]);
    }
    prior_init.push_back(std::move(x));
  }

  CrrModel model;
  TrainState<CRRParams> st = train(model, sc, lik_ptrs, theta, post_init, prior_init);

  std::string csv = "iter,loss\n";
  for (std::size_t n = 0; n < st.loss_trace.size(); ++n) {
    csv += std::to_string(n + 1) + "," + to_precise_string(st.loss_trace[n]) + "\n";
  }
  std::filesystem::create_directories(out);
  detail::write_file(out + "/loss.csv", csv);
  write_run_log(out, "train", cfg);
  if (st.diverged) {
    std::cerr << "error: " << st.divergence_message << " (last checkpoint retained)\n";
    return 2;
  }
  if (st.iteration > 0 && sc.checkpoint_dir.empty()) model.save(st.params, st.iteration, sc.seed, out);
  return 0;
}

// ------------------------------------------------------- shared estimation

struct EstimationSetup {
  Dataset noisy;
  LinearOperator op;
  std::vector<std::unique_ptr<Likelihood>> liks;
};

EstimationSetup load_estimation_inputs(const Config& cfg) {
  std::string in = cfg.get_string("in");
  if (in.empty()) throw ConfigError("missing in=<noisy dataset dir>");
  EstimationSetup es;
  es.noisy = dataset_read(in);
  es.op = operator_from_metadata(es.noisy, es.noisy.items[0].tensor.shape());
  for (std::size_t n = 0; n < es.noisy.items.size(); ++n) {
    es.liks.push_back(likelihood_from_metadata(es.noisy, n, es.op));
  }
  return es;
}

void write_reconstructions(const std::string& out, const std::vector<Tensor>& recon,
                           const std::map<std::string, std::string>& extra) {
  Dataset ds;
  for (const Tensor& t : recon) ds.items.emplace_back(t);
  ds.metadata = extra;
  dataset_write(out, ds);
  for (std::size_t n = 0; n < recon.size(); ++n) {
    const Image& img = ds.items[n];
    std::string ext = img.channels() == 1 ? ".pgm" : ".ppm";
    pnm_write(out + "/" + item_name(n) + ext, img);
  }
}

void append_metrics_csv(const std::string& path, const std::vector<Tensor>& recon,
                        const Dataset& ref, const std::vector<double>& lambdas) {
  std::string csv = "name,psnr,ssim,lambda\n";
  for (std::size_t n = 0; n < recon.size(); ++n) {
    csv += item_name(n) + "," + to_precise_string(psnr(recon[n], ref.items[n].tensor)) + "," +
           to_precise_string(ssim(recon[n], ref.items[n].tensor)) + "," +
           to_precise_string(lambdas[n]) + "\n";
  }
  detail::write_file(path, csv);
}

int cmd_mmse(const Config& cfg) {
  std::string out = cfg.get_string("out");
  std::string ckpt = cfg.get_string("ckpt");
  if (out.empty() || ckpt.empty()) throw ConfigError("mmse needs out=<dir> ckpt=<file>");
  EstimationSetup es = load_estimation_inputs(cfg);
  Checkpoint ck = checkpoint_read(ckpt);
  CrrPrior prior(ck.params, cfg.get_double("lambda", 1.0));

  bool poisson = es.noisy.metadata.count("noise") && es.noisy.metadata.at("noise") == "poisson";
  MMSEConfig mc;
  mc.warmstart = std::size_t(cfg.get_int("mmse_warmstart", 5000));
  mc.samples = std::size_t(cfg.get_int("mmse_samples", 20000));
  mc.gamma = cfg.get_double("gamma", poisson ? 5e-6 : 1e-4);
  mc.seed = std::uint64_t(cfg.get_int("seed", 0));

  std::vector<Tensor> means, stds;
  for (std::size_t n = 0; n < es.liks.size(); ++n) {
    MMSEConfig per = mc;
    per.stream_id = mc.stream_id + n;
    MMSEResult r = run_mmse(prior, *es.liks[n], per, default_posterior_init(*es.liks[n]));
    means.push_back(std::move(r.mean));
    stds.push_back(std::move(r.std_dev));
  }
  write_reconstructions(out, means, {{"estimator", "mmse"}});
  for (std::size_t n = 0; n < stds.size(); ++n) {
    tensor_io_write(out + "/" + item_name(n) + "_std.tnsr", stds[n]);
  }
  write_run_log(out, "mmse", cfg);
  return 0;
}

int run_map_like(const Config& cfg, const std::string& subcommand) {
  std::string out = cfg.get_string("out");
  if (out.empty()) throw ConfigError(subcommand + " needs out=<dir>");
  EstimationSetup es = load_estimation_inputs(cfg);

  std::unique_ptr<Prior> prior;
  if (subcommand == "map") {
    std::string ckpt = cfg.get_string("ckpt");
    if (ckpt.empty()) throw ConfigError("map needs ckpt=<file>");
    prior = std::make_unique<CrrPrior>(checkpoint_read(ckpt).params);
  } else {
    prior = std::make_unique<SmoothedTV>(1.0, cfg.get_double("tv_eps", 1e-3));
  }

  MAPConfig mapc;
  mapc.max_iters = std::size_t(cfg.get_int("map_iters", 10000));
  mapc.step = cfg.get_double("map_step", 1e-3);
  mapc.optimizer = cfg.get_string("optimizer", "adam") == "gd" ? MapOptimizer::GradientDescent
                                                               : MapOptimizer::Adam;
  std::string ref_dir = cfg.get_string("ref");
  if (cfg.has("lambda")) {
    mapc.lambda_grid = {cfg.get_double("lambda", 1.0)};
  } else {
    mapc.lambda_grid = cfg.get_double_list(
        "lambda_grid", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    if (mapc.lambda_grid.size() > 1 && ref_dir.empty()) {
      throw ConfigError("lambda grid search needs ref=<clean dataset dir> (or pass lambda=)");
    }
  }
  Dataset ref;
  if (!ref_dir.empty()) ref = dataset_read(ref_dir);

  std::vector<Tensor> recon;
  std::vector<double> lambdas;
  for (std::size_t n = 0; n < es.liks.size(); ++n) {
    Tensor x0 = default_posterior_init(*es.liks[n]);
    const Tensor* gt = ref_dir.empty() ? nullptr : &ref.items[n].tensor;
    MAPResult r = run_map(*prior, *es.liks[n], mapc, x0, gt);
    recon.push_back(std::move(r.x));
    lambdas.push_back(r.lambda);
  }
  std::map<std::string, std::string> meta = {{"estimator", subcommand}};
  for (std::size_t n = 0; n < lambdas.size(); ++n) {
    meta["lambda_" + std::to_string(n)] = to_precise_string(lambdas[n]);
  }
  write_reconstructions(out, recon, meta);
  if (!ref_dir.empty()) {
    append_metrics_csv(out + "/" + cfg.get_string("out_csv", "metrics.csv"), recon, ref, lambdas);
  }
  write_run_log(out, subcommand, cfg);
  return 0;
}

int cmd_eval(const Config& cfg) {
  std::string in = cfg.get_string("in");
  std::string ref_dir = cfg.get_string("ref");
  if (in.empty() || ref_dir.empty()) throw ConfigError("eval needs in=<dir> ref=<dir>");
  Dataset recon = dataset_read(in);
  Dataset ref = dataset_read(ref_dir);
  if (recon.items.size() != ref.items.size()) throw ShapeError("eval: dataset sizes differ");
  std::vector<Tensor> tensors;
  std::vector<double> lambdas;
  for (std::size_t n = 0; n < recon.items.size(); ++n) {
    tensors.push_back(recon.items[n].tensor);
    auto it = recon.metadata.find("lambda_" + std::to_string(n));
    lambdas.push_back(it == recon.metadata.end() ? 0.0 : std::stod(it->second));
  }
  std::string out_csv = cfg.get_string("out_csv", in + "/metrics.csv");
  append_metrics_csv(out_csv, tensors, ref, lambdas);
  write_run_log(in, "eval", cfg);
  return 0;
}

// ------------------------------------------------------------------ check

int cmd_check(const Config& cfg) {
  std::uint64_t seed = std::uint64_t(cfg.get_int("seed", 0));
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "pass" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  {  // adjoint dot tests
    RngStream r(seed, 1);
    bool ok = true;
    std::vector<LinearOperator> ops;
    std::vector<std::size_t> shape = {1, 12, 12};
    ops.push_back(LinearOperator::identity(shape));
    ops.push_back(LinearOperator::conv2d(shape, gaussian_blur_kernel(5, 1.0)));
    ops.push_back(LinearOperator::conv2d(shape, uniform_blur_kernel(3)));
    ops.push_back(LinearOperator::random_mask(shape, 0.7, seed));
    ops.push_back(LinearOperator::finite_difference(shape));
    for (const LinearOperator& op : ops) {
      for (int probe = 0; probe < 20; ++probe) {
        Tensor a = sample_std_normal(r, op.input_shape());
        Tensor b = sample_std_normal(r, op.output_shape());
        double lhs = op.apply(a).dot(b), rhs = a.dot(op.adjoint(b));
        double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        ok = ok && std::fabs(lhs - rhs) <= 1e-10 * scale;
      }
    }
    report("adjoint dot tests", ok);
  }

  {  // finite-difference gradient suites
    RngStream r(seed, 2);
    bool ok = true;
    CRRParams p = CRRParams::init(1, 3, 4, 10, 0.01, true, true, seed + 5);
    p.learn_scale = true;
    for (std::size_t i = 0; i < p.splines.d.size(); ++i) p.splines.d[i] = 0.5 + r.next_uniform();
    Tensor x = sample_std_normal(r, {1, 8, 8});
    x *= 0.05;
    Tensor gx = g_grad_x(p, x);
    double h = 1e-6;
    for (int probe = 0; probe < 10; ++probe) {
      std::size_t i = r.next_u64() % x.size();
      Tensor xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fd = (g_forward(p, xp) - g_forward(p, xm)) / (2 * h);
      ok = ok && std::fabs(fd - gx[i]) <= 1e-5 * std::max(1e-8, std::fabs(fd));
    }
    SmoothedTV tv(0.7);
    Tensor tg = tv.grad(x);
    for (int probe = 0; probe < 10; ++probe) {
      std::size_t i = r.next_u64() % x.size();
      Tensor xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fd = (tv.value(xp) - tv.value(xm)) / (2 * h);
      ok = ok && std::fabs(fd - tg[i]) <= 1e-6 * std::max(1e-8, std::fabs(fd));
    }
    report("finite-difference gradient suites", ok);
  }

  {  // spline quadrature identity (Simpson on sigma vs closed-form psi)
    RngStream r(seed, 3);
    bool ok = true;
    SplineBank sb(1, 10, 0.01);
    for (int probe = 0; probe < 20; ++probe) {
      for (std::size_t i = 0; i < sb.d.size(); ++i) sb.d[i] = 0.2 + 2.0 * r.next_uniform();
      double t = (r.next_uniform() - 0.5) * 0.4;
      // The integrand is piecewise linear with kinks at the knots, so
      // Simpson is only O(h^2) near kinks; the tolerance reflects that.
      std::size_t panels = 20000;
      double hstep = t / double(panels);
      double acc = sb.sigma(0, 0.0) + sb.sigma(0, t);
      for (std::size_t k = 1; k < panels; ++k) {
        acc += (k % 2 ? 4.0 : 2.0) * sb.sigma(0, double(k) * hstep);
      }
      acc *= hstep / 3.0;
      ok = ok && std::fabs(acc - sb.psi(0, t)) <= 1e-7;
    }
    report("spline integral identity", ok);
  }

  {  // streaming moments vs two-pass
    RngStream r(seed, 4);
    WelfordAccumulator acc;
    std::vector<double> vals;
    for (int i = 0; i < 10000; ++i) {
      double v = r.next_normal();
      vals.push_back(v);
      Tensor t({1});
      t[0] = v;
      acc.add(t);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= double(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= double(vals.size());
    bool ok = std::fabs(acc.mean()[0] - mean) <= 1e-10 && std::fabs(acc.variance()[0] - var) <= 1e-10;
    report("streaming moment accumulator", ok);
  }

  {  // ULA stationary variance on 1-D standard normal target
    RngStream r(seed, 5);
    double gamma = 0.1;
    Tensor x({1});
    std::uint64_t step = 0;
    WelfordAccumulator acc;
    for (int k = 0; k < 1100000; ++k) {
      Tensor g = x;  // grad of x^2/2
      Tensor z = sample_std_normal(r, {1});
      x = ula_update(x, g, gamma, z, false, ++step);
      if (k >= 100000) acc.add(x);
    }
    double target = 2.0 / (2.0 - gamma);
    bool ok = std::fabs(acc.variance()[0] - target) <= 0.01 * target;
    report("ULA stationary variance", ok);
  }

  {  // scalar conjugate-Gaussian trainer oracle (short run, 10% tolerance)
    std::size_t d = 64;
    double sigma = 0.5;
    RngStream r(seed, 6);
    Tensor xstar = sample_std_normal(r, {d});
    Tensor y = xstar;
    y.axpy(sigma, sample_std_normal(r, {d}));
    double theta_hat = 1.0 / (y.dot(y) / double(d) - sigma * sigma);
    GaussianLikelihood lik(LinearOperator::identity({d}), y, sigma);
    SAPGConfig sc;
    sc.gamma = sc.gamma_prime = 1e-3;
    sc.delta_absolute = 1e-3 / double(d);
    sc.iterations = 50000;
    sc.seed = seed;
    ScalarQuadraticModel model;
    // Tail-average the trajectory; the final iterate alone is too noisy.
    double sum = 0.0;
    std::size_t count = 0;
    TrainState<double> st =
        train(model, sc, {&lik}, 1.0, {y}, {sample_std_normal(r, {d})},
              [&](const TrainState<double>& s) {
                if (s.iteration > sc.iterations / 2) {
                  sum += s.params;
                  ++count;
                }
              });
    double est = count ? sum / double(count) : st.params;
    bool ok = !st.diverged && std::fabs(est - theta_hat) <= 0.10 * theta_hat;
    report("scalar marginal-likelihood oracle", ok);
  }

  return failures == 0 ? 0 : 2;
}

void usage() {
  std::cerr << "usage: crr <corrupt|train|mmse|map|tv|eval|check> [--config=FILE] [--key=value...]\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage();
    return 1;
  }
  std::string sub = argv[1];
  try {
    Config cfg;
    std::vector<std::string> overrides;
    for (int i = 2; i < argc; ++i) {
      std::string a = argv[i];
      if (a.rfind("--config=", 0) == 0) {
        Config file_cfg = parse_config(crrlearn::detail::read_file(a.substr(9)));
        for (const auto& [k, v] : file_cfg.values()) cfg.set(k, v);
      } else {
        overrides.push_back(a);
      }
    }
    apply_cli_overrides(cfg, overrides);
    cfg.validate();
    cfg.get_int("threads", 1);  // accepted for forward compatibility; single-threaded build

    if (sub == "corrupt") return cmd_corrupt(cfg);
    if (sub == "train") return cmd_train(cfg);
    if (sub == "mmse") return cmd_mmse(cfg);
    if (sub == "map" || sub == "tv") return run_map_like(cfg, sub);
    if (sub == "eval") return cmd_eval(cfg);
    if (sub == "check") return cmd_check(cfg);
    usage();
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
