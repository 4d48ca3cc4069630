#include "otafl/privacy.hpp"

#include <cmath>
#include <string>

namespace otafl {

namespace {

constexpr long kTailChunk = 4096;

void check_device(const SystemConfig& cfg, int m) {
  if (m < 0 || m >= cfg.num_devices) throw ConfigError("device index out of range: " + std::to_string(m));
}

long tail_chunk_hits(std::uint64_t seed, long draws, int rounds, double mean, double sd, double eps) {
  Rng rng(seed);
  std::normal_distribution<double> nd(mean, sd);
  long hits = 0;
  for (long i = 0; i < draws; ++i) {
    double acc = 0.0;
    for (int t = 0; t < rounds; ++t) acc += nd(rng);
    if (std::abs(acc) > eps) ++hits;
  }
  return hits;
}

struct TailPlan {
  double mean;
  double sd;
  long chunks;
  std::vector<std::uint64_t> seeds;
};

TailPlan plan_tail(double sensitivity, double noise_std, long mc_draws, Rng& rng) {
  if (!(noise_std > 0.0)) throw ConfigError("noise_std must be positive");
  if (mc_draws < 1) throw ConfigError("mc_draws must be positive");
  const double ratio = sensitivity / noise_std;
  TailPlan p{0.5 * ratio * ratio, ratio, (mc_draws + kTailChunk - 1) / kTailChunk, {}};
  p.seeds.resize(static_cast<std::size_t>(p.chunks));
  for (auto& s : p.seeds) s = rng();
  return p;
}

long chunk_size(long c, long chunks, long total) { return c + 1 < chunks ? kTailChunk : total - c * kTailChunk; }

}  // namespace

bool DpReport::all_feasible() const {
  for (bool f : feasible)
    if (!f) return false;
  return true;
}

double phi_constant(const SystemConfig& cfg, int m) {
  check_device(cfg, m);
  const double delta = cfg.dp_delta[static_cast<std::size_t>(m)];
  const double eps = cfg.dp_epsilon[static_cast<std::size_t>(m)];
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("dp_delta must lie in (0,1)");
  if (std::isinf(eps)) return 0.0;
  return 8.0 * cfg.model_dim * std::log(1.0 / delta) / (eps * eps);
}

double sensitivity_bound(const CVec& f, const CVec& h, cd s1, int samples, int dim, double /*clip_level*/) {
  return 2.0 * std::sqrt(static_cast<double>(dim)) * std::abs(f.dot(h)) * std::abs(s1) / samples;
}

double extracted_noise_power(const CVec& f, const TransceiverDesign& design, const ChannelMatrix& channel,
                             const SystemConfig& cfg) {
  const Vec gains = (channel.entries.adjoint() * f).cwiseAbs2();
  return gains.dot(design.s2.cwiseAbs2()) + cfg.noise_var;
}

double epsilon_bs_with(const CVec& f, const TransceiverDesign& design, const ChannelMatrix& channel,
                       const SystemConfig& cfg, int m) {
  check_device(cfg, m);
  const double noise = extracted_noise_power(f, design, channel, cfg);
  if (!(noise > 0.0)) throw ConfigError("total noise power must be positive");
  const auto mi = static_cast<std::size_t>(m);
  const double km = cfg.samples_per_device[mi];
  const double gain = std::norm(f.dot(channel.column(m)));
  const double num = 8.0 * gain * std::norm(design.s1(m)) * cfg.model_dim * cfg.rounds *
                     std::log(1.0 / cfg.dp_delta[mi]);
  return std::sqrt(num / (km * km * noise));
}

double epsilon_bs(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg,
                  int m) {
  return epsilon_bs_with(design.extractors.at(static_cast<std::size_t>(m)), design, channel, cfg, m);
}

double sinr(const CVec& f, int m, const TransceiverDesign& design, const ChannelMatrix& channel,
            const SystemConfig& cfg) {
  check_device(cfg, m);
  const Vec gains = (channel.entries.adjoint() * f).cwiseAbs2();
  double interference = cfg.noise_var;
  for (int j = 0; j < channel.devices(); ++j)
    if (j != m) interference += gains(j) * design.s2(j) * design.s2(j);
  return gains(m) * std::norm(design.s1(m)) / interference;
}

CVec mmse_extractor(const ChannelMatrix& channel, const TransceiverDesign& design, const SystemConfig& cfg,
                    int m) {
  check_device(cfg, m);
  const int n = channel.antennas();
  const int devices = channel.devices();
  if (std::abs(design.s1(m)) > 0.0) {
    CMat ht(n, devices);
    for (int j = 0; j < devices; ++j) ht.col(j) = channel.column(j) * (j == m ? design.s1(m) : cd(design.s2(j)));
    CMat gram = ht.adjoint() * ht;
    gram.diagonal().array() += cfg.noise_var;
    const CVec col = gram.llt().solve(CVec::Unit(devices, m));
    CVec f = ht * col;
    const double nrm = f.norm();
    if (nrm > 0.0 && std::isfinite(nrm)) return f / nrm;
  }
  CMat r = CMat::Identity(n, n) * cfg.noise_var;
  for (int j = 0; j < devices; ++j)
    if (j != m) r.noalias() += design.s2(j) * design.s2(j) * channel.column(j) * channel.column(j).adjoint();
  CVec f = r.llt().solve(CVec(channel.column(m)));
  const double nrm = f.norm();
  if (!(nrm > 0.0)) {
    // h_m = 0: every direction is equally useless to the extractor.
    f = CVec::Unit(n, 0);
    return f;
  }
  return f / nrm;
}

std::vector<CVec> mmse_extractors(const ChannelMatrix& channel, const TransceiverDesign& design,
                                  const SystemConfig& cfg) {
  std::vector<CVec> out;
  out.reserve(static_cast<std::size_t>(channel.devices()));
  for (int m = 0; m < channel.devices(); ++m) out.push_back(mmse_extractor(channel, design, cfg, m));
  return out;
}

DpReport dp_report(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg) {
  const int devices = cfg.num_devices;
  DpReport rep;
  rep.phi.resize(devices);
  rep.sensitivity.resize(devices);
  rep.eps_bs.resize(devices);
  rep.feasible.assign(static_cast<std::size_t>(devices), true);
  for (int m = 0; m < devices; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const CVec& f = design.extractors.at(mi);
    rep.phi(m) = phi_constant(cfg, m);
    rep.sensitivity(m) = sensitivity_bound(f, channel.column(m), design.s1(m), cfg.samples_per_device[mi],
                                           cfg.model_dim, cfg.clip_level);
    rep.eps_bs(m) = epsilon_bs(design, channel, cfg, m);
    rep.feasible[mi] = rep.eps_bs(m) <= cfg.dp_epsilon[mi] * (1.0 + 1e-9);
  }
  return rep;
}

double empirical_privacy_tail(double sensitivity, double noise_std, int rounds, double eps, long mc_draws,
                              Rng& rng) {
  const TailPlan p = plan_tail(sensitivity, noise_std, mc_draws, rng);
  if (sensitivity == 0.0) return eps < 0.0 ? 1.0 : 0.0;
  long hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (long c = 0; c < p.chunks; ++c)
    hits += tail_chunk_hits(p.seeds[static_cast<std::size_t>(c)], chunk_size(c, p.chunks, mc_draws), rounds,
                            p.mean, p.sd, eps);
  return static_cast<double>(hits) / static_cast<double>(mc_draws);
}

double empirical_privacy_tail_serial(double sensitivity, double noise_std, int rounds, double eps,
                                     long mc_draws, Rng& rng) {
  const TailPlan p = plan_tail(sensitivity, noise_std, mc_draws, rng);
  if (sensitivity == 0.0) return eps < 0.0 ? 1.0 : 0.0;
  long hits = 0;
  for (long c = 0; c < p.chunks; ++c)
    hits += tail_chunk_hits(p.seeds[static_cast<std::size_t>(c)], chunk_size(c, p.chunks, mc_draws), rounds,
                            p.mean, p.sd, eps);
  return static_cast<double>(hits) / static_cast<double>(mc_draws);
}

}  // namespace otafl
