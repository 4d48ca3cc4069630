#include "otafl/ridge.hpp"

#include <cmath>
#include <string>

namespace otafl {

std::vector<int> equal_split(int total, int devices) {
  if (devices < 1 || total % devices != 0)
    throw ConfigError("cannot split " + std::to_string(total) + " samples equally over " +
                      std::to_string(devices) + " devices");
  return std::vector<int>(static_cast<std::size_t>(devices), total / devices);
}

RidgeDataset generate_ridge_dataset(const SystemConfig& cfg, double reg_coefficient, Rng& rng,
                                    double measurement_var) {
  if (!(reg_coefficient > 0.0)) throw ConfigError("reg_coefficient must be positive");
  const int k_total = cfg.total_samples();
  const int d = cfg.model_dim;
  RidgeDataset ds;
  ds.reg_coefficient = reg_coefficient;
  ds.w_true = normal_matrix(rng, d, 1).col(0);
  // Row-major draw order: sample k's features are consecutive in the stream.
  ds.inputs = normal_matrix(rng, d, k_total).transpose();
  ds.outputs = ds.inputs * ds.w_true;
  if (measurement_var > 0.0) ds.outputs += normal_matrix(rng, k_total, 1, measurement_var).col(0);
  int offset = 0;
  for (int km : cfg.samples_per_device) {
    ds.partition.push_back({offset, km});
    offset += km;
  }
  return ds;
}

double loss(const RidgeDataset& ds, const Vec& w) {
  const double k = ds.samples();
  return (ds.outputs - ds.inputs * w).squaredNorm() / (2.0 * k) + 0.5 * ds.reg_coefficient * w.squaredNorm();
}

Vec gradient(const RidgeDataset& ds, const Vec& w) {
  const double k = ds.samples();
  return ds.inputs.transpose() * (ds.inputs * w - ds.outputs) / k + ds.reg_coefficient * w;
}

Vec exact_minimizer(const RidgeDataset& ds) {
  const double k = ds.samples();
  Mat normal = ds.inputs.transpose() * ds.inputs;
  normal.diagonal().array() += k * ds.reg_coefficient;
  return normal.llt().solve(ds.inputs.transpose() * ds.outputs);
}

std::pair<double, double> strong_convexity_params(const RidgeDataset& ds) {
  const double k = ds.samples();
  Mat hess = ds.inputs.transpose() * ds.inputs / k;
  hess.diagonal().array() += ds.reg_coefficient;
  Eigen::SelfAdjointEigenSolver<Mat> es(hess, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(es.eigenvalues().size() - 1)};
}

Vec clipped_sample_gradient(const RidgeDataset& ds, int k, const Vec& w, double clip_level) {
  const auto u = ds.inputs.row(k).transpose();
  Vec g = (u.dot(w) - ds.outputs(k)) * u + ds.reg_coefficient * w;
  const double bound = std::sqrt(static_cast<double>(ds.dim())) * clip_level;
  const double scale = std::max(1.0, g.norm() / bound);
  return g / scale;
}

Vec local_gradient(const RidgeDataset& ds, int m, const Vec& w, double clip_level) {
  const SampleRange r = ds.partition.at(static_cast<std::size_t>(m));
  Vec acc = Vec::Zero(ds.dim());
  for (int k = r.offset; k < r.offset + r.size; ++k) acc += clipped_sample_gradient(ds, k, w, clip_level);
  return acc / static_cast<double>(r.size);
}

Mat local_gradients_serial(const RidgeDataset& ds, const Vec& w, double clip_level) {
  Mat out(ds.devices(), ds.dim());
  for (int m = 0; m < ds.devices(); ++m) out.row(m) = local_gradient(ds, m, w, clip_level).transpose();
  return out;
}

Mat local_gradients(const RidgeDataset& ds, const Vec& w, double clip_level) {
  const int devices = ds.devices();
  Mat out(devices, ds.dim());
#pragma omp parallel for schedule(static)
  for (int m = 0; m < devices; ++m) out.row(m) = local_gradient(ds, m, w, clip_level).transpose();
  return out;
}

void fill_convexity(SystemConfig& cfg, const RidgeDataset& ds) {
  const auto [mu, omega] = strong_convexity_params(ds);
  cfg.strong_convexity = mu;
  cfg.smoothness = omega;
}

}  // namespace otafl
