#include "otafl/airsim.hpp"

#include <cmath>

namespace otafl {

CMat transmit_round(const TransceiverDesign& design, const Mat& grads, Rng& rng, const SystemConfig& cfg,
                    const ChannelMatrix& channel) {
  const Eigen::Index devices = channel.devices();
  const Eigen::Index d = grads.cols();
  const Mat art = normal_matrix(rng, devices, d);
  const CMat z = cfg.noise_var > 0.0 ? complex_normal_matrix(rng, channel.antennas(), d, cfg.noise_var)
                                     : CMat(CMat::Zero(channel.antennas(), d));
  CMat x(devices, d);
  for (Eigen::Index m = 0; m < devices; ++m)
    x.row(m) = (design.s1(m) / cfg.clip_level) * grads.row(m).cast<cd>() + design.s2(m) * art.row(m).cast<cd>();
  return channel.entries * x + z;
}

CVec combine(const CMat& block, const CVec& f0, double eta) {
  return (f0.adjoint() * block).transpose() / std::sqrt(eta);
}

Vec aggregate(const CMat& block, const CVec& f0, double eta) { return combine(block, f0, eta).real(); }

CVec extract(const CMat& block, const CVec& fm) { return (fm.adjoint() * block).transpose(); }

TrainResult train(const SystemConfig& cfg, const ChannelMatrix& channel, const TransceiverDesign& design,
                  const RidgeDataset& ds, Rng& rng) {
  if (!(cfg.smoothness > 0.0)) throw ConfigError("train needs the smoothness constant");
  const int t_max = cfg.rounds;
  const double k = ds.samples();
  const double f_star = loss(ds, exact_minimizer(ds));
  TrainResult res;
  res.loss_trajectory.resize(t_max + 1);
  res.gap_trajectory.resize(t_max + 1);
  res.gradient_error_norms = Vec::Zero(t_max);
  Vec w = Vec::Zero(ds.dim());
  const double initial = loss(ds, w);
  res.loss_trajectory(0) = initial;
  int t = 0;
  for (; t < t_max; ++t) {
    const Mat grads = local_gradients(ds, w, cfg.clip_level);
    const CMat block = transmit_round(design, grads, rng, cfg, channel);
    const Vec ghat = aggregate(block, design.f0, design.eta);
    res.gradient_error_norms(t) = (ghat / k - gradient(ds, w)).norm();
    w -= ghat / (cfg.smoothness * k);
    const double f = loss(ds, w);
    res.loss_trajectory(t + 1) = f;
    if (!std::isfinite(f) || f > 1e6 * initial) {
      res.diverged = true;
      ++t;
      break;
    }
  }
  for (int r = t + 1; r <= t_max; ++r) res.loss_trajectory(r) = res.loss_trajectory(t);
  res.gap_trajectory = (res.loss_trajectory.array() - f_star) / f_star;
  res.final_w = w;
  return res;
}

double normalized_gap(const TrainResult& result, const RidgeDataset& ds) {
  const double f_star = loss(ds, exact_minimizer(ds));
  if (!(f_star > 0.0)) throw ConfigError("normalized gap undefined for F* = 0");
  return (loss(ds, result.final_w) - f_star) / f_star;
}

}  // namespace otafl
