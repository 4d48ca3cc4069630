#include "otafl/convergence.hpp"

#include <cmath>

namespace otafl {

double contraction_factor(double mu, double omega) {
  if (!(mu > 0.0 && mu <= omega)) throw ConfigError("need 0 < mu <= omega");
  return 1.0 - mu / omega;
}

double noise_term_A(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg) {
  if (!(design.eta > 0.0)) throw ConfigError("eta must be positive");
  const Vec gains = (channel.entries.adjoint() * design.f0).cwiseAbs2();
  const double k = cfg.total_samples();
  const double noise = gains.dot(design.s2.cwiseAbs2()) + cfg.noise_var;
  return cfg.model_dim * noise / (2.0 * cfg.smoothness * k * k * design.eta);
}

double mismatch_term_Ct(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg,
                        const Mat& grads) {
  const CVec g0 = channel.entries.adjoint() * design.f0;  // conj(f0^H h_m)
  const double scale = std::sqrt(design.eta) * cfg.clip_level;
  CVec coef(channel.devices());
  for (int m = 0; m < channel.devices(); ++m)
    coef(m) = static_cast<double>(cfg.samples_per_device[static_cast<std::size_t>(m)]) -
              std::conj(g0(m)) * design.s1(m) / scale;
  const CVec err = grads.transpose().cast<cd>() * coef;
  const double k = cfg.total_samples();
  return err.squaredNorm() / (2.0 * cfg.smoothness * k * k);
}

double loss_upper_bound(double optimal_loss, double initial_gap, double contraction, double noise_term,
                        const Vec& mismatch, int rounds) {
  if (!(contraction >= 0.0 && contraction < 1.0)) throw ConfigError("contraction must lie in [0,1)");
  if (mismatch.size() != 0 && mismatch.size() != rounds) throw ConfigError("mismatch needs one entry per round");
  const double bt = std::pow(contraction, rounds);
  double value = optimal_loss + bt * initial_gap + noise_term * (1.0 - bt) / (1.0 - contraction);
  for (int t = 1; t <= static_cast<int>(mismatch.size()); ++t)
    value += std::pow(contraction, rounds - t) * mismatch(t - 1);
  return value;
}

BoundReport bound_report(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg,
                         double optimal_loss, double initial_loss, const Vec& mismatch) {
  BoundReport rep;
  rep.contraction = contraction_factor(cfg.strong_convexity, cfg.smoothness);
  rep.noise_term = noise_term_A(design, channel, cfg);
  rep.mismatch_terms = mismatch.size() ? mismatch : Vec::Zero(cfg.rounds);
  rep.optimal_loss = optimal_loss;
  rep.initial_gap = initial_loss - optimal_loss;
  rep.bound_value = loss_upper_bound(optimal_loss, rep.initial_gap, rep.contraction, rep.noise_term,
                                     rep.mismatch_terms, cfg.rounds);
  return rep;
}

}  // namespace otafl
