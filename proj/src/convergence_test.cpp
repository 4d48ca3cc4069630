#include <doctest.h>

#include <cmath>

#include "otafl/convergence.hpp"
#include "otafl/ridge.hpp"

using namespace otafl;

namespace {

TransceiverDesign unit_design(int n, int m) {
  TransceiverDesign d;
  d.s1 = CVec::Ones(m);
  d.s2 = Vec::Zero(m);
  d.f0 = CVec::Unit(n, 0);
  d.eta = 1.0;
  return d;
}

}  // namespace

TEST_CASE("contraction factor") {
  CHECK(contraction_factor(2.0, 2.0) == 0.0);
  CHECK(contraction_factor(1.0, 2.0) == 0.5);
  CHECK_THROWS_AS(contraction_factor(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(contraction_factor(2.0, 1.0), ConfigError);

  SystemConfig cfg;
  Rng rng(21);
  const RidgeDataset ds = generate_ridge_dataset(cfg, 1e-3, rng);
  Mat hess = ds.inputs.transpose() * ds.inputs / ds.samples();
  hess.diagonal().array() += ds.reg_coefficient;
  // Extreme eigenvalues by power iteration on H and on (lambda_max I - H).
  auto power = [](const Mat& a) {
    Vec x = Vec::LinSpaced(a.rows(), 1.0, 2.0).normalized();
    for (int i = 0; i < 20000; ++i) x = (a * x).normalized();
    return x.dot(a * x);
  };
  const double lmax = power(hess);
  const double lmin = lmax - power(lmax * Mat::Identity(20, 20) - hess);
  auto [mu, omega] = strong_convexity_params(ds);
  CHECK(std::abs(contraction_factor(mu, omega) - (1.0 - lmin / lmax)) <= 1e-10);
}

TEST_CASE("noise term A") {
  SystemConfig cfg;
  cfg.num_antennas = 2;
  cfg.set_uniform(1, 1, 30.0, 1e-3);
  cfg.model_dim = 1;
  cfg.noise_var = 1.0;
  cfg.strong_convexity = 0.5;
  cfg.smoothness = 1.0;
  const ChannelMatrix ch(CMat::Constant(2, 1, cd(0.3, -2.0)));
  TransceiverDesign d = unit_design(2, 1);
  CHECK(noise_term_A(d, ch, cfg) == doctest::Approx(0.5).epsilon(1e-15));

  d.eta = 1e300;
  CHECK(noise_term_A(d, ch, cfg) < 1e-299);
  d.eta = 3.0;
  const double base = noise_term_A(d, ch, cfg);
  cfg.noise_var = 2.0;
  CHECK(noise_term_A(d, ch, cfg) == doctest::Approx(2.0 * base).epsilon(1e-15));
}

TEST_CASE("mismatch term C_t") {
  SystemConfig cfg;
  cfg.num_antennas = 3;
  cfg.set_uniform(4, 25, 30.0, 1e-3);
  cfg.model_dim = 5;
  cfg.clip_level = 0.7;
  cfg.strong_convexity = 0.2;
  cfg.smoothness = 1.3;
  Rng rng(22);
  const ChannelMatrix ch(complex_normal_matrix(rng, 3, 4));
  const Mat grads = normal_matrix(rng, 4, 5);

  TransceiverDesign d = unit_design(3, 4);
  d.f0 = complex_normal_matrix(rng, 3, 1).col(0).normalized();
  d.eta = 0.37;
  for (int m = 0; m < 4; ++m) {
    const cd gain = d.f0.dot(ch.column(m));  // f0^H h_m
    d.s1(m) = std::sqrt(d.eta) * cfg.clip_level * 25.0 / gain;
  }
  CHECK(mismatch_term_Ct(d, ch, cfg, grads) <= 1e-18);

  d.s1 = complex_normal_matrix(rng, 4, 1).col(0);
  CHECK(mismatch_term_Ct(d, ch, cfg, Mat::Zero(4, 5)) == 0.0);

  // Entry-by-entry re-summation of (1/2 omega K^2) sum_i |sum_m (K_m - f0^H h_m s1_m/(sqrt(eta) L)) g_m[i]|^2.
  double total = 0.0;
  for (int i = 0; i < 5; ++i) {
    cd acc = 0.0;
    for (int m = 0; m < 4; ++m) {
      cd inner = 0.0;
      for (int n = 0; n < 3; ++n) inner += std::conj(d.f0(n)) * ch.entries(n, m);
      acc += (25.0 - inner * d.s1(m) / (std::sqrt(d.eta) * cfg.clip_level)) * grads(m, i);
    }
    total += std::norm(acc);
  }
  total /= 2.0 * cfg.smoothness * 100.0 * 100.0;
  CHECK(mismatch_term_Ct(d, ch, cfg, grads) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("loss upper bound") {
  CHECK(loss_upper_bound(0.25, 3.0, 0.9, 0.0, Vec(), 100000) == doctest::Approx(0.25).epsilon(1e-14));
  const Vec c1 = Vec::Constant(1, 0.125);
  CHECK(loss_upper_bound(0.25, 3.0, 0.9, 0.5, c1, 1) == doctest::Approx(0.25 + 0.9 * 3.0 + 0.5 + 0.125));
  CHECK_THROWS_AS(loss_upper_bound(0.0, 1.0, 1.0, 0.0, Vec(), 3), ConfigError);
  CHECK_THROWS_AS(loss_upper_bound(0.0, 1.0, 0.5, 0.0, Vec::Zero(2), 3), ConfigError);

  // Geometric sum against explicit unrolling.
  const Vec ct = (Vec(3) << 0.1, 0.2, 0.3).finished();
  double value = 0.0;
  for (int t = 0; t < 3; ++t) value = 0.5 * value + 0.7 + ct(t);
  value += std::pow(0.5, 3) * 2.0 + 1.0;
  CHECK(loss_upper_bound(1.0, 2.0, 0.5, 0.7, ct, 3) == doctest::Approx(value).epsilon(1e-14));
}
