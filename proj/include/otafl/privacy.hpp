#pragma once

#include <vector>

#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/design.hpp"
#include "otafl/rng.hpp"

namespace otafl {

struct DpReport {
  Vec phi;
  Vec sensitivity;
  Vec eps_bs;
  std::vector<bool> feasible;

  bool all_feasible() const;
};

/// 8 d ln(1/delta_m) / eps_m^2, or 0 for eps_m = inf.
double phi_constant(const SystemConfig& cfg, int m);

/// 2 sqrt(d) |f^H h| |s1| / K_m. The clip level cancels; it is accepted
/// only so every privacy helper takes the same arguments.
double sensitivity_bound(const CVec& f, const CVec& h, cd s1, int samples, int dim, double clip_level);

/// Noise power seen through f: sum_m' |f^H h_m'|^2 s2_m'^2 + sigma^2.
double extracted_noise_power(const CVec& f, const TransceiverDesign& design, const ChannelMatrix& channel,
                             const SystemConfig& cfg);

/// Tight privacy level at the BS after cfg.rounds rounds, using the design's
/// extractor for device m.
double epsilon_bs(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg,
                  int m);

/// Same, with an arbitrary extractor f in place of the design's.
double epsilon_bs_with(const CVec& f, const TransceiverDesign& design, const ChannelMatrix& channel,
                       const SystemConfig& cfg, int m);

double sinr(const CVec& f, int m, const TransceiverDesign& design, const ChannelMatrix& channel,
            const SystemConfig& cfg);

/// SINR-optimal unit extractor for device m: normalized column m of
/// Ht (Ht^H Ht + sigma^2 I)^{-1}, where Ht has columns h_m' s2_m' except
/// column m, which is h_m s1_m. When s1_m = 0 the column vanishes and the
/// (equivalent) direction R_m^{-1} h_m is returned instead.
CVec mmse_extractor(const ChannelMatrix& channel, const TransceiverDesign& design, const SystemConfig& cfg,
                    int m);

std::vector<CVec> mmse_extractors(const ChannelMatrix& channel, const TransceiverDesign& design,
                                  const SystemConfig& cfg);

DpReport dp_report(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg);

/// Monte Carlo estimate of Pr(|sum_{t<=T} L_t| > eps) with i.i.d. per-round
/// privacy loss L_t ~ N(D^2/(2 s^2), D^2/s^2), D = sensitivity, s = noise_std.
///
/// Draws are split into fixed-size chunks with seeds taken from `rng`, so the
/// parallel and serial versions return identical counts.
double empirical_privacy_tail(double sensitivity, double noise_std, int rounds, double eps, long mc_draws,
                              Rng& rng);
double empirical_privacy_tail_serial(double sensitivity, double noise_std, int rounds, double eps,
                                     long mc_draws, Rng& rng);

}  // namespace otafl
