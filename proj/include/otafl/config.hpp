#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace otafl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scenario constants shared by every module.
///
/// Defaults reproduce the ridge-regression setup (M=10, N=20, d=20, T=30,
/// K_m=100, P_max=1, SNR=15 dB, delta=1e-3). `strong_convexity` and
/// `smoothness` left at 0 mean "derive from the dataset".
struct SystemConfig {
  int num_devices = 10;
  int num_antennas = 20;
  int model_dim = 20;
  int rounds = 30;
  std::vector<int> samples_per_device = std::vector<int>(10, 100);
  double max_power = 1.0;
  double noise_var = 0.031622776601683791;  // 15 dB
  double clip_level = 0.1;
  std::vector<double> dp_epsilon = std::vector<double>(10, 30.0);
  std::vector<double> dp_delta = std::vector<double>(10, 1e-3);
  double strong_convexity = 0.0;
  double smoothness = 0.0;
  double penalty = 1.0;
  int mm_iters = 50;
  int outer_iters = 10;
  double early_stop_tol = 1e-4;
  std::uint64_t rng_seed = 0;

  int total_samples() const;
  int max_samples() const;
  double learning_rate() const { return 1.0 / smoothness; }
  bool has_convexity() const { return strong_convexity > 0.0 && smoothness > 0.0; }
  bool dp_enabled() const;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  /// Resize per-device vectors to `m` devices with uniform values.
  void set_uniform(int m, int samples, double epsilon, double delta);
  void set_snr_db(double snr_db);
  double snr_db() const;
};

}  // namespace otafl
