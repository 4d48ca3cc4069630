#pragma once

#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/design.hpp"

namespace otafl {

struct BoundReport {
  double contraction = 0.0;  // B
  double noise_term = 0.0;   // A
  Vec mismatch_terms;        // C_t, t = 1..T
  double optimal_loss = 0.0; // F(w*)
  double initial_gap = 0.0;  // F(w0) - F(w*)
  double bound_value = 0.0;
};

/// B = 1 - mu/omega. Throws ConfigError unless 0 < mu <= omega.
double contraction_factor(double mu, double omega);

/// A = d (sum_m |f0^H h_m|^2 s2_m^2 + sigma^2) / (2 omega K^2 eta).
double noise_term_A(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg);

/// C_t evaluated on realized device gradients (M x d, one row per device).
double mismatch_term_Ct(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg,
                        const Mat& grads);

/// F* + B^T gap + A (1 - B^T)/(1 - B) + sum_t B^{T-t} C_t. `mismatch` may be
/// empty (all C_t = 0) or hold T entries.
double loss_upper_bound(double optimal_loss, double initial_gap, double contraction, double noise_term,
                        const Vec& mismatch, int rounds);

/// Assembles the report with C_t = 0 unless `mismatch` is supplied.
BoundReport bound_report(const TransceiverDesign& design, const ChannelMatrix& channel, const SystemConfig& cfg,
                         double optimal_loss, double initial_loss, const Vec& mismatch = Vec());

}  // namespace otafl
