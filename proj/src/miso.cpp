#include "otafl/miso.hpp"

#include <algorithm>
#include <cmath>

#include "otafl/privacy.hpp"

namespace otafl {

namespace {

void require_single_antenna(const ChannelMatrix& channel) {
  if (channel.antennas() != 1) throw ConfigError("single-antenna design needs N = 1");
}

double max_phi(const SystemConfig& cfg) {
  double best = 0.0;
  for (int m = 0; m < cfg.num_devices; ++m) best = std::max(best, phi_constant(cfg, m));
  return best;
}

double max_inversion_cost(const SystemConfig& cfg, const ChannelMatrix& channel) {
  double best = 0.0;
  for (int m = 0; m < channel.devices(); ++m) {
    const double k = cfg.samples_per_device[static_cast<std::size_t>(m)];
    best = std::max(best, k * k / std::norm(channel.entries(0, m)));
  }
  return best;
}

}  // namespace

const char* to_string(MisoRegime r) { return r == MisoRegime::NoiseLimited ? "noise_limited" : "power_limited"; }

double t0_threshold(const SystemConfig& cfg, const ChannelMatrix& channel) {
  require_single_antenna(channel);
  const double phi = max_phi(cfg);
  if (phi == 0.0) return kInf;
  return cfg.noise_var / (cfg.max_power * phi) * max_inversion_cost(cfg, channel);
}

MisoSolution miso_optimal_design(const SystemConfig& cfg, const ChannelMatrix& channel) {
  require_single_antenna(channel);
  const int devices = channel.devices();
  const double l2 = cfg.clip_level * cfg.clip_level;
  MisoSolution sol;
  sol.t0_threshold = t0_threshold(cfg, channel);
  auto& d = sol.design;
  if (cfg.rounds >= sol.t0_threshold) {
    sol.regime = MisoRegime::NoiseLimited;
    d.eta = cfg.noise_var / (l2 * cfg.rounds * max_phi(cfg));
  } else {
    sol.regime = MisoRegime::PowerLimited;
    d.eta = cfg.max_power / (l2 * max_inversion_cost(cfg, channel));
  }
  d.f0 = CVec::Ones(1);
  d.s1.resize(devices);
  d.s2 = Vec::Zero(devices);
  const double root = std::sqrt(d.eta) * cfg.clip_level;
  for (int m = 0; m < devices; ++m) {
    const cd h = channel.entries(0, m);
    d.s1(m) = root * cfg.samples_per_device[static_cast<std::size_t>(m)] * std::conj(h) / std::norm(h);
  }
  d.extractors.assign(static_cast<std::size_t>(devices), CVec::Ones(1));
  return sol;
}

MisoCheck check_optimality_conditions(const MisoSolution& sol, const SystemConfig& cfg,
                                      const ChannelMatrix& channel, double tol) {
  require_single_antenna(channel);
  const auto& d = sol.design;
  const int devices = channel.devices();
  const double l2 = cfg.clip_level * cfg.clip_level;
  MisoCheck chk;
  chk.regime = cfg.rounds >= t0_threshold(cfg, channel) ? MisoRegime::NoiseLimited : MisoRegime::PowerLimited;

  double noise = cfg.noise_var;
  for (int m = 0; m < devices; ++m) noise += std::norm(channel.entries(0, m)) * d.s2(m) * d.s2(m);

  chk.alignment = 0.0;
  chk.power = -kInf;
  chk.privacy = -kInf;
  for (int m = 0; m < devices; ++m) {
    const double k = cfg.samples_per_device[static_cast<std::size_t>(m)];
    const cd h = channel.entries(0, m);
    const cd ratio = h * d.s1(m) / (std::sqrt(d.eta) * cfg.clip_level * k);
    chk.alignment = std::max(chk.alignment, std::abs(ratio - 1.0));
    chk.power = std::max(chk.power, (std::norm(d.s1(m)) + d.s2(m) * d.s2(m) - cfg.max_power) / cfg.max_power);
    const double need = std::norm(h) * std::norm(d.s1(m)) * cfg.rounds * phi_constant(cfg, m) / (k * k);
    chk.privacy = std::max(chk.privacy, (need - noise) / noise);
  }
  const double q = noise / d.eta;
  const double q_star = std::max(l2 * cfg.rounds * max_phi(cfg),
                                 cfg.noise_var * l2 * max_inversion_cost(cfg, channel) / cfg.max_power);
  chk.objective = (q - q_star) / q_star;
  chk.ok = chk.alignment <= tol && chk.power <= tol && chk.privacy <= tol && std::abs(chk.objective) <= tol;
  return chk;
}

}  // namespace otafl
