#pragma once

#include <vector>

#include "otafl/types.hpp"

namespace otafl {

// ---------------------------------------------------------------------------
// Trace-constrained SDP: min <C, F> s.t. h_i^H F h_i >= b_i, F PSD.
// ---------------------------------------------------------------------------

struct SdpOptions {
  double tol = 1e-8;
  int max_iters = 200;
};

struct SdpSolution {
  CMat F;
  double tau = 0.0;  // tr(F)
  Vec duals;         // multipliers of the trace constraints (0 for inactive rows)
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;  // max_i relative violation of h_i^H F h_i >= b_i
  double dual_residual = 0.0;    // -lambda_min(C - sum y_i h_i h_i^H), relative
  double gap = 0.0;              // relative duality gap
};

/// Primal-dual interior point (HKM direction, Mehrotra predictor-corrector)
/// working directly on complex Hermitian iterates. Rows with b_i <= 0 are
/// implied by F PSD and dropped. With no active row the minimizer is the
/// floor F = 1e-12 v v^H along the cheapest eigen-direction v of C.
///
/// Throws Infeasible when an active row has h_i = 0, NumericalFailure when
/// the tolerance is not reached within the iteration cap.
SdpSolution solve_trace_sdp(const CMat& cost, const CMat& channels, const Vec& lower_bounds,
                            const SdpOptions& opts = {});

/// One convexified subproblem of the rank-penalized design.
struct SdpSubproblem {
  CMat channels;       // N x M, columns h_m
  Vec noise_weights;   // s2_m^2
  double tau_weight = 0.0;  // sigma^2
  Vec lower_bounds;    // max of the DP and power bounds per device
  double penalty = 1.0;
  CVec direction;      // current zeta

  int dim() const { return static_cast<int>(channels.rows()); }
  /// sum_m s2_m^2 h_m h_m^H + sigma^2 I, the cost without the penalty.
  CMat base_cost() const;
  /// Base cost plus rho (I - zeta zeta^H).
  CMat cost() const;
};

SdpSolution solve_sdp_mm_step(const SdpSubproblem& p, const SdpOptions& opts = {});

struct DcOptions {
  SdpOptions sdp;
  /// Stop once the penalized objective changes by at most this (relative)
  /// and the iterate is rank one to within rank_tol.
  double objective_tol = 1e-7;
  double rank_tol = 1e-6;
  /// When the objective has settled on an F that is not rank one, the
  /// penalty is multiplied by this factor (1 keeps it fixed).
  double penalty_growth = 2.0;
};

struct DcSdpResult {
  CMat F;
  double tau = 0.0;
  double trace_gap = 0.0;  // tr(F) - lambda_1(F)
  CVec direction;          // principal eigenvector of the returned F
  std::vector<double> objective_history;  // <C0, F_j> + rho_j (tr F_j - lambda_1(F_j))
  double final_penalty = 0.0;
  int iterations = 0;
};

/// Majorization-minimization on the rank penalty, up to `mm_iters` steps,
/// starting from `init_direction`.
DcSdpResult solve_dc_sdp(const SdpSubproblem& instance, int mm_iters, const CVec& init_direction,
                         const DcOptions& opts = {});

/// Unit eigenvector for the largest eigenvalue. Repeated top eigenvalues are
/// resolved by projecting the lowest-index canonical axis that is not
/// orthogonal to the top eigenspace; the phase makes the largest-modulus
/// entry real positive.
CVec principal_eigvec(const CMat& F);

struct RankOneFactor {
  CVec f0;
  double eta = 0.0;
  double eigen_ratio = 0.0;  // lambda_2 / lambda_1
};

/// f0 = principal eigenvector, eta = 1/tau. Throws RankTooHigh when
/// lambda_2/lambda_1 exceeds max_ratio.
RankOneFactor rank_one_factor(const CMat& F, double tau, double max_ratio = 0.1);

// ---------------------------------------------------------------------------
// Artificial-noise LP: min c^T x s.t. A x >= r, 0 <= x <= u, with c, A >= 0.
// ---------------------------------------------------------------------------

struct LpProblem {
  Vec costs;
  Mat constraint_matrix;
  Vec rhs;
  Vec box_upper;
};

struct LpSolution {
  Vec x;
  Vec row_duals;  // >= 0, one per row of A x >= r
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
};

/// Mehrotra primal-dual interior point on the standard-form lift
/// (x, p, q) >= 0 with A x - p = r and x + q = u. Throws Infeasible when the
/// box cannot reach the rows (A u < r, exploiting A >= 0) or when u < 0.
LpSolution solve_lp(const LpProblem& p, double tol = 1e-9);

}  // namespace otafl
