#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/conic.hpp"
#include "otafl/config.hpp"
#include "otafl/design.hpp"
#include "otafl/privacy.hpp"
#include "otafl/rng.hpp"

namespace otafl {

struct PlannerOptions {
  DcOptions dc;
  /// Keep s2 = 0 throughout (the zero-artificial-noise variant).
  bool force_zero_noise = false;
};

struct PlannerTrace {
  std::vector<double> objective;       // A after each outer iteration
  std::vector<double> max_residual;    // feasibility residual after each outer iteration
  std::vector<int> mm_iterations;      // MM steps used by each DC-SDP call
  std::vector<double> trace_gap_ratio; // (tr F - lambda_1)/tr F of each DC-SDP result
  std::optional<int> early_stop_iteration;
  int best_iteration = -1;
  int degenerate_retries = 0;
  int rank_fallbacks = 0;  // F not rank one; f0 taken by Gaussian randomization
  std::string termination;
  DpReport final_report;
};

struct PlannerResult {
  TransceiverDesign design;
  PlannerTrace trace;
};

/// s1_m = sqrt(eta) L K_m conj(f0^H h_m) / |f0^H h_m|^2, so that
/// f0^H h_m s1_m / (sqrt(eta) L) = K_m. Throws DegenerateChannel when some
/// |f0^H h_m| < 1e-12.
CVec s1_closed_form(double eta, const CVec& f0, const ChannelMatrix& channel, const SystemConfig& cfg);

/// Starting point: |s1_m| uniform in [0, sqrt(P)], s2_m = sqrt(P - |s1_m|^2)
/// (zero without DP), f0 = h_1/|h_1|, MMSE extractors.
TransceiverDesign initial_design(const SystemConfig& cfg, const ChannelMatrix& channel, Rng& rng, bool with_dp);

/// Alternating optimization: MMSE extractors, rank-penalized SDP for
/// (f0, eta), LP for the artificial-noise powers, closed-form s1, with the
/// best feasible iterate returned. `cfg.smoothness` must be set (A uses it).
PlannerResult optimize_transceivers(const SystemConfig& cfg, const ChannelMatrix& channel,
                                    const TransceiverDesign& init, bool with_dp, const PlannerOptions& opts = {});

struct FeasibilityReport {
  Vec privacy;  // per device: (required - available noise)/available noise
  Vec power;    // per device: (|s1|^2 + s2^2 - P)/P
  double norm = 0.0;  // max deviation of |f0|, |f_m| from 1
  double max_residual = 0.0;
};

/// Residuals of the design constraints; positive entries are violations.
/// DP rows use the design's own extractors and are skipped for eps = inf.
FeasibilityReport feasibility_check(const TransceiverDesign& design, const SystemConfig& cfg,
                                    const ChannelMatrix& channel);

}  // namespace otafl
