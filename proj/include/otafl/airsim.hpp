#pragma once

#include "otafl/channel.hpp"
#include "otafl/config.hpp"
#include "otafl/design.hpp"
#include "otafl/ridge.hpp"
#include "otafl/rng.hpp"

namespace otafl {

struct TrainResult {
  Vec loss_trajectory;         // T+1 entries, starting at w0 = 0
  Vec gap_trajectory;          // (F(w_t) - F*)/F*
  Vec gradient_error_norms;    // |e_t| = |ghat_t/K - grad F(w_t)|, T entries
  Vec final_w;
  bool diverged = false;
};

/// Received block y[i] = sum_m h_m (s1_m g_m[i]/L + s2_m n_m[i]) + z[i] for
/// i = 1..d, with real N(0,1) artificial noise (drawn first, M x d) and
/// CN(0, sigma^2) receiver noise (N x d, not drawn when sigma^2 = 0). `grads`
/// holds one device per row.
CMat transmit_round(const TransceiverDesign& design, const Mat& grads, Rng& rng, const SystemConfig& cfg,
                    const ChannelMatrix& channel);

/// f0^H y / sqrt(eta), before the real part is taken.
CVec combine(const CMat& block, const CVec& f0, double eta);

/// Real part of combine(): the gradient estimate used for the update.
Vec aggregate(const CMat& block, const CVec& f0, double eta);

/// r_m[i] = f_m^H y[i].
CVec extract(const CMat& block, const CVec& fm);

/// T rounds of w <- w - (1/(omega K)) ghat_t from w0 = 0. Runs are flagged
/// diverged once the loss exceeds 1e6 times its initial value; the remaining
/// trajectory entries repeat the last value.
TrainResult train(const SystemConfig& cfg, const ChannelMatrix& channel, const TransceiverDesign& design,
                  const RidgeDataset& ds, Rng& rng);

/// (F(w_T) - F*)/F*; throws ConfigError when F* = 0.
double normalized_gap(const TrainResult& result, const RidgeDataset& ds);

}  // namespace otafl
