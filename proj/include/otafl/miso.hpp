#pragma once

#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/design.hpp"

namespace otafl {

enum class MisoRegime { NoiseLimited, PowerLimited };

const char* to_string(MisoRegime r);

struct MisoSolution {
  TransceiverDesign design;
  double t0_threshold = 0.0;
  MisoRegime regime = MisoRegime::PowerLimited;
};

/// T0 = sigma^2 / (P max_m phi_m) * max_m K_m^2/|h_m|^2; +inf without DP.
double t0_threshold(const SystemConfig& cfg, const ChannelMatrix& channel);

/// Optimal single-antenna design: aligned full-inversion s1, s2 = 0, and eta
/// at whichever of the DP or power limits binds first.
MisoSolution miso_optimal_design(const SystemConfig& cfg, const ChannelMatrix& channel);

struct MisoCheck {
  bool ok = false;
  double alignment = 0.0;    // max_m |h_m s1_m / (sqrt(eta) L K_m) - 1|
  double power = 0.0;        // max_m (|s1|^2 + s2^2 - P)/P, positive when violated
  double privacy = 0.0;      // max_m relative DP-constraint violation
  double objective = 0.0;    // (q - q*)/q*, q = noise power / eta
  MisoRegime regime = MisoRegime::PowerLimited;
};

/// Verifies alignment, feasibility and that the noise-to-eta ratio attains
/// the lower bound max(L^2 T max phi, sigma^2 L^2 max K^2/|h|^2 / P), which
/// every feasible point satisfies. Designs with s2 > 0 pass when they reach
/// the bound (possible when T >= T0).
MisoCheck check_optimality_conditions(const MisoSolution& sol, const SystemConfig& cfg,
                                      const ChannelMatrix& channel, double tol = 1e-8);

}  // namespace otafl
