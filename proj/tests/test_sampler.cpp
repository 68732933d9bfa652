#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <random>

#include "crrlearn/sampler.hpp"

using namespace crrlearn;

TEST_CASE("ULA update identities with the noise pinned to zero") {
  Tensor x({3}, {1.0, -2.0, 0.5});
  Tensor zero({3});
  SECTION("zero gradient keeps the state") {
    Tensor next = ula_update(x, zero, 0.1, zero, false, 1);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(next[i] == x[i]);
  }
  SECTION("quadratic energy contracts geometrically") {
    // grad E = x / s^2; contraction factor |1 - gamma/s^2|.
    double s2 = 0.5, gamma = 0.1;
    Tensor cur = x;
    double factor = std::fabs(1.0 - gamma / s2);
    for (int k = 1; k <= 20; ++k) {
      Tensor grad = cur;
      grad *= 1.0 / s2;
      cur = ula_update(cur, grad, gamma, zero, false, std::uint64_t(k));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      REQUIRE(cur[i] == Catch::Approx(x[i] * std::pow(factor, 20)).margin(1e-12));
    }
  }
}

TEST_CASE("reflected update mirrors negative proposals") {
  Tensor x({2}, {0.1, 0.5});
  Tensor grad({2});
  Tensor z({2}, {-1.0, 0.2});
  double gamma = 0.02;
  Tensor plain = ula_update(x, grad, gamma, z, false, 1);
  Tensor refl = ula_update(x, grad, gamma, z, true, 1);
  REQUIRE(plain[0] < 0.0);
  REQUIRE(refl[0] == Catch::Approx(-plain[0]));
  REQUIRE(refl[1] == Catch::Approx(plain[1]));  // positive proposals untouched
}

TEST_CASE("divergence guard fires with step context") {
  Tensor x({1}, {1.0});
  Tensor grad({1}, {-2e9});
  Tensor z({1});
  try {
    ula_update(x, grad, 1.0, z, false, 17);
    FAIL("expected ChainDiverged");
  } catch (const ChainDiverged& e) {
    REQUIRE(e.step_count == 17);
  }
}

TEST_CASE("1-D Gaussian target reaches the biased stationary variance") {
  // For target N(0, s^2) the chain is AR(1) with stationary variance
  // 2 s^2 / (2 - gamma / s^2).
  double gamma = 0.1;
  RngStream r(101, 0);
  Tensor x({1});
  WelfordAccumulator acc;
  std::uint64_t step = 0;
  for (int k = 0; k < 220000; ++k) {
    Tensor g = x;
    Tensor z = sample_std_normal(r, {1});
    x = ula_update(x, g, gamma, z, false, ++step);
    if (k >= 20000) acc.add(x);
  }
  double target = 2.0 / (2.0 - gamma);
  REQUIRE(acc.variance()[0] == Catch::Approx(target).epsilon(0.02));
}

TEST_CASE("smaller gamma means smaller stationary bias") {
  // |empirical var - 1| should shrink when gamma drops 4x, averaged over
  // repetitions (the O(sqrt(gamma)) direction of the discretization bias).
  auto mean_abs_bias = [](double gamma) {
    double acc = 0.0;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
      RngStream r(300 + rep, rep);
      Tensor x({1});
      WelfordAccumulator w;
      std::uint64_t step = 0;
      for (int k = 0; k < 120000; ++k) {
        Tensor g = x;
        Tensor z = sample_std_normal(r, {1});
        x = ula_update(x, g, gamma, z, false, ++step);
        if (k >= 20000) w.add(x);
      }
      acc += std::fabs(w.variance()[0] - 1.0);
    }
    return acc / 10.0;
  };
  REQUIRE(mean_abs_bias(0.1 / 4.0) < mean_abs_bias(0.1));
}

TEST_CASE("streaming moments") {
  SECTION("single sample") {
    WelfordAccumulator acc;
    Tensor v({2}, {3.0, -1.0});
    acc.add(v);
    REQUIRE(acc.mean()[0] == 3.0);
    REQUIRE(acc.variance()[1] == 0.0);
  }
  SECTION("population convention on {1,2,3}") {
    WelfordAccumulator acc;
    for (double v : {1.0, 2.0, 3.0}) {
      Tensor t({1});
      t[0] = v;
      acc.add(t);
    }
    REQUIRE(acc.mean()[0] == Catch::Approx(2.0));
    REQUIRE(acc.variance()[0] == Catch::Approx(2.0 / 3.0));
    REQUIRE(acc.std_dev()[0] == Catch::Approx(std::sqrt(2.0 / 3.0)));
  }
  SECTION("empty accumulator refuses queries") {
    WelfordAccumulator acc;
    REQUIRE_THROWS(acc.mean());
  }
  SECTION("agrees with two-pass statistics and is order-insensitive") {
    RngStream r(102, 0);
    std::vector<double> vals;
    for (int i = 0; i < 10000; ++i) vals.push_back(r.next_normal() * 3.0 + 1.0);
    auto run = [](const std::vector<double>& vs) {
      WelfordAccumulator acc;
      for (double v : vs) {
        Tensor t({1});
        t[0] = v;
        acc.add(t);
      }
      return std::pair<double, double>(acc.mean()[0], acc.variance()[0]);
    };
    auto [m1, v1] = run(vals);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= double(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= double(vals.size());
    REQUIRE(std::fabs(m1 - mean) <= 1e-10);
    REQUIRE(std::fabs(v1 - var) <= 1e-10 * std::max(1.0, var));
    std::mt19937 shuffle_rng(5);
    std::shuffle(vals.begin(), vals.end(), shuffle_rng);
    auto [m2, v2] = run(vals);
    REQUIRE(std::fabs(m1 - m2) <= 1e-10);
  }
}

TEST_CASE("identical seeds give identical trajectories") {
  auto run = [] {
    RngStream r(55, 3);
    Tensor x({4}, {0.2, -0.1, 0.0, 0.4});
    std::uint64_t step = 0;
    for (int k = 0; k < 50; ++k) {
      Tensor g = x;
      Tensor z = sample_std_normal(r, x.shape());
      x = ula_update(x, g, 0.05, z, false, ++step);
    }
    return x;
  };
  Tensor a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}
