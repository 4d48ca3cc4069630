#pragma once

#include <utility>
#include <vector>

#include "otafl/config.hpp"
#include "otafl/rng.hpp"
#include "otafl/types.hpp"

namespace otafl {

/// Contiguous slice of the sample rows owned by one device.
struct SampleRange {
  int offset = 0;
  int size = 0;
};

/// Synthetic ridge-regression data, F(w) = (1/2K)||v - Uw||^2 + (reg/2)||w||^2.
struct RidgeDataset {
  Mat inputs;    // K x d
  Vec outputs;   // K
  std::vector<SampleRange> partition;
  double reg_coefficient = 1e-3;
  Vec w_true;

  int samples() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  int devices() const { return static_cast<int>(partition.size()); }
};

/// u_k ~ N(0, I_d), w_true ~ N(0, I_d), v_k = w_true^T u_k + n_k with
/// n_k ~ N(0, measurement_var). Samples are assigned to devices in order,
/// sizes taken from cfg.samples_per_device.
RidgeDataset generate_ridge_dataset(const SystemConfig& cfg, double reg_coefficient, Rng& rng,
                                    double measurement_var = 0.2);

/// Uniform split of `total` samples into `devices` equal parts; throws
/// ConfigError when the split is not exact.
std::vector<int> equal_split(int total, int devices);

double loss(const RidgeDataset& ds, const Vec& w);
Vec gradient(const RidgeDataset& ds, const Vec& w);

/// argmin of `loss`: (U^T U + K reg I)^{-1} U^T v.
Vec exact_minimizer(const RidgeDataset& ds);

/// Extreme eigenvalues (mu, omega) of the Hessian (1/K) U^T U + reg I.
std::pair<double, double> strong_convexity_params(const RidgeDataset& ds);

/// Per-sample gradient (u^T w - v) u + reg w, clipped to norm sqrt(d) L.
Vec clipped_sample_gradient(const RidgeDataset& ds, int k, const Vec& w, double clip_level);

/// Average of the clipped per-sample gradients of device m.
Vec local_gradient(const RidgeDataset& ds, int m, const Vec& w, double clip_level);

/// All device gradients stacked as an M x d matrix. Devices are processed in
/// parallel; every row is accumulated in sample order, so the result is
/// bit-identical to local_gradients_serial.
Mat local_gradients(const RidgeDataset& ds, const Vec& w, double clip_level);
Mat local_gradients_serial(const RidgeDataset& ds, const Vec& w, double clip_level);

/// Copies mu and omega of the dataset into the config.
void fill_convexity(SystemConfig& cfg, const RidgeDataset& ds);

}  // namespace otafl
