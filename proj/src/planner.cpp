#include "otafl/planner.hpp"

#include <algorithm>
#include <cmath>

#include "otafl/convergence.hpp"

namespace otafl {

namespace {

constexpr double kDegenerate = 1e-12;
constexpr double kFeasibleTol = 1e-6;
constexpr int kRandomizations = 200;

Vec combiner_gains(const CVec& f0, const ChannelMatrix& channel) {
  return (channel.entries.adjoint() * f0).cwiseAbs2();
}

/// Right side of the DP row for device m, per unit of eta/|f0^H h_m|^2:
/// |f_m^H h_m|^2 T L^2 phi_m.
double dp_weight(const CVec& f, const ChannelMatrix& channel, const SystemConfig& cfg, int m) {
  const double l2 = cfg.clip_level * cfg.clip_level;
  return std::norm(f.dot(channel.column(m))) * cfg.rounds * l2 * phi_constant(cfg, m);
}

/// Largest eta keeping every device within its DP target under the given
/// extractors and noise powers, for f0 fixed.
double dp_eta_cap(const TransceiverDesign& d, const ChannelMatrix& channel, const SystemConfig& cfg) {
  const Vec g0 = combiner_gains(d.f0, channel);
  double cap = kInf;
  for (int m = 0; m < channel.devices(); ++m) {
    const double w = dp_weight(d.extractors[static_cast<std::size_t>(m)], channel, cfg, m);
    if (w <= 0.0) continue;
    cap = std::min(cap, extracted_noise_power(d.extractors[static_cast<std::size_t>(m)], d, channel, cfg) * g0(m) / w);
  }
  return cap;
}

CVec perturbed(const CVec& f, Rng& rng) {
  CVec g = f + 1e-6 * complex_normal_matrix(rng, f.size(), 1).col(0);
  return g.normalized();
}

// (sum_m s2_m^2 g_m + sigma^2) / eta with the largest eta the bounds allow.
double combiner_cost(const CVec& f, const SdpSubproblem& sub) {
  const Vec g = (sub.channels.adjoint() * f).cwiseAbs2();
  double eta = kInf;
  for (Eigen::Index m = 0; m < g.size(); ++m) eta = std::min(eta, g(m) / sub.lower_bounds(m));
  return eta > 0.0 ? (g.dot(sub.noise_weights) + sub.tau_weight) / eta : kInf;
}

// Gaussian randomization of a high-rank F: candidates F^{1/2} xi with
// xi ~ CN(0, I), plus the principal eigenvector.
CVec randomized_combiner(const CMat& F, const SdpSubproblem& sub, Rng& rng, int draws) {
  Eigen::SelfAdjointEigenSolver<CMat> es(F);
  const CMat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  CVec best = principal_eigvec(F);
  double best_cost = combiner_cost(best, sub);
  for (int i = 0; i < draws; ++i) {
    const CVec v = root * complex_normal_matrix(rng, F.rows(), 1).col(0);
    if (v.norm() == 0.0) continue;
    const CVec f = v.normalized();
    const double c = combiner_cost(f, sub);
    if (c < best_cost) {
      best_cost = c;
      best = f;
    }
  }
  return best;
}

}  // namespace

CVec s1_closed_form(double eta, const CVec& f0, const ChannelMatrix& channel, const SystemConfig& cfg) {
  const CVec g0 = channel.entries.adjoint() * f0;  // conj(f0^H h_m)
  const double root = std::sqrt(eta) * cfg.clip_level;
  CVec s1(channel.devices());
  for (int m = 0; m < channel.devices(); ++m) {
    const double a = std::abs(g0(m));
    if (a < kDegenerate) throw DegenerateChannel("combiner orthogonal to device " + std::to_string(m));
    s1(m) = root * cfg.samples_per_device[static_cast<std::size_t>(m)] * g0(m) / (a * a);
  }
  return s1;
}

TransceiverDesign initial_design(const SystemConfig& cfg, const ChannelMatrix& channel, Rng& rng, bool with_dp) {
  const int devices = channel.devices();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TransceiverDesign d;
  d.s1.resize(devices);
  d.s2.resize(devices);
  const double root_p = std::sqrt(cfg.max_power);
  for (int m = 0; m < devices; ++m) {
    const double a = unif(rng) * root_p;
    d.s1(m) = a;
    d.s2(m) = with_dp ? std::sqrt(std::max(0.0, cfg.max_power - a * a)) : 0.0;
  }
  d.f0 = channel.column(0).normalized();
  d.eta = 1.0;
  d.extractors = mmse_extractors(channel, d, cfg);
  return d;
}

FeasibilityReport feasibility_check(const TransceiverDesign& design, const SystemConfig& cfg,
                                    const ChannelMatrix& channel) {
  const int devices = channel.devices();
  FeasibilityReport rep;
  rep.privacy = Vec::Constant(devices, -kInf);
  rep.power.resize(devices);
  rep.norm = std::abs(design.f0.norm() - 1.0);
  double worst = -kInf;
  for (int m = 0; m < devices; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const CVec& f = design.extractors.at(mi);
    rep.norm = std::max(rep.norm, std::abs(f.norm() - 1.0));
    const double k = cfg.samples_per_device[mi];
    rep.power(m) = (std::norm(design.s1(m)) + design.s2(m) * design.s2(m) - cfg.max_power) / cfg.max_power;
    worst = std::max(worst, rep.power(m));
    if (std::isinf(cfg.dp_epsilon[mi])) continue;
    const double noise = extracted_noise_power(f, design, channel, cfg);
    const double need = std::norm(f.dot(channel.column(m))) * std::norm(design.s1(m)) * cfg.rounds *
                        phi_constant(cfg, m) / (k * k);
    rep.privacy(m) = (need - noise) / noise;
    worst = std::max(worst, rep.privacy(m));
  }
  rep.max_residual = std::max(worst, rep.norm);
  return rep;
}

PlannerResult optimize_transceivers(const SystemConfig& cfg, const ChannelMatrix& channel,
                                    const TransceiverDesign& init, bool with_dp, const PlannerOptions& opts) {
  if (!(cfg.smoothness > 0.0)) throw ConfigError("planner needs the smoothness constant");
  const int devices = channel.devices();
  const double l2 = cfg.clip_level * cfg.clip_level;
  const bool zero_noise = !with_dp || opts.force_zero_noise;
  Rng retry_rng(derive_seed(cfg.rng_seed, {0x706c616eULL}));

  TransceiverDesign cur = init;
  if (zero_noise) cur.s2 = Vec::Zero(devices);
  cur.extractors = mmse_extractors(channel, cur, cfg);

  PlannerResult out;
  PlannerTrace& tr = out.trace;
  std::optional<TransceiverDesign> best;
  double best_a = kInf;
  tr.termination = "max_iters";

  for (int it = 0; it < cfg.outer_iters; ++it) {
    // Trace lower bounds b_m = max(DP bound, power bound) for the current
    // extractors and noise powers.
    Vec b(devices);
    for (int m = 0; m < devices; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const double k = cfg.samples_per_device[mi];
      const double head = cfg.max_power - cur.s2(m) * cur.s2(m);
      if (!(head > 0.0)) throw Infeasible("no power left for the gradient of device " + std::to_string(m));
      double bound = k * k * l2 / head;
      if (with_dp) {
        const CVec& f = cur.extractors[mi];
        const double w = dp_weight(f, channel, cfg, m);
        if (w > 0.0) bound = std::max(bound, w / extracted_noise_power(f, cur, channel, cfg));
      }
      b(m) = bound;
    }

    SdpSubproblem sub;
    sub.channels = channel.entries;
    sub.noise_weights = cur.s2.cwiseAbs2();
    sub.tau_weight = cfg.noise_var;
    sub.lower_bounds = b;
    sub.penalty = cfg.penalty;

    DcSdpResult dc;
    try {
      // The penalty-free relaxation supplies the starting direction.
      const SdpSolution relaxed = solve_trace_sdp(sub.base_cost(), sub.channels, b, opts.dc.sdp);
      dc = solve_dc_sdp(sub, cfg.mm_iters, principal_eigvec(relaxed.F), opts.dc);
    } catch (const NumericalFailure&) {
      if (!best) throw;
      tr.termination = "solver_failure";
      break;
    }
    tr.mm_iterations.push_back(dc.iterations);
    tr.trace_gap_ratio.push_back(dc.trace_gap / std::real(dc.F.trace()));

    // A small second eigenvalue can still carry a weak device, so f0 is
    // always the cheapest of the principal direction and the randomized draws.
    try {
      rank_one_factor(dc.F, dc.tau);
    } catch (const RankTooHigh&) {
      ++tr.rank_fallbacks;
    }
    CVec f0 = randomized_combiner(dc.F, sub, retry_rng, kRandomizations);
    Vec g0 = combiner_gains(f0, channel);
    for (int retry = 0; g0.minCoeff() < kDegenerate * kDegenerate; ++retry) {
      if (retry == 3) throw DegenerateChannel("combiner stayed orthogonal to a device after 3 perturbations");
      ++tr.degenerate_retries;
      f0 = perturbed(f0, retry_rng);
      g0 = combiner_gains(f0, channel);
    }

    // eta is re-fit to the extracted f0 so the bounds hold exactly.
    double eta = kInf;
    for (int m = 0; m < devices; ++m) eta = std::min(eta, g0(m) / b(m));

    TransceiverDesign next = cur;
    next.f0 = f0;
    if (!zero_noise) {
      LpProblem lp;
      lp.costs = g0;
      lp.constraint_matrix.resize(devices, devices);
      lp.rhs.resize(devices);
      lp.box_upper.resize(devices);
      for (int m = 0; m < devices; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        const CVec& f = cur.extractors[mi];
        lp.constraint_matrix.row(m) = (channel.entries.adjoint() * f).cwiseAbs2().transpose();
        lp.rhs(m) = dp_weight(f, channel, cfg, m) * eta / g0(m) - cfg.noise_var;
        const double k = cfg.samples_per_device[mi];
        lp.box_upper(m) = std::max(0.0, cfg.max_power - k * k * l2 * eta / g0(m));
      }
      const LpSolution x = solve_lp(lp);
      next.s2 = x.x.cwiseMax(0.0).cwiseSqrt();
    }
    next.eta = eta;
    next.s1 = s1_closed_form(eta, f0, channel, cfg);
    next.extractors = mmse_extractors(channel, next, cfg);
    if (with_dp) {
      // Fresh extractors can see more than the ones the LP was built on;
      // shrinking eta restores the DP rows without moving the extractors.
      const double cap = dp_eta_cap(next, channel, cfg);
      if (cap < next.eta) {
        next.eta = cap;
        next.s1 = s1_closed_form(cap, f0, channel, cfg);
      }
    }

    const double a = noise_term_A(next, channel, cfg);
    const FeasibilityReport fr = feasibility_check(next, cfg, channel);
    tr.objective.push_back(a);
    tr.max_residual.push_back(fr.max_residual);
    if (fr.max_residual <= kFeasibleTol && a < best_a) {
      best_a = a;
      best = next;
      tr.best_iteration = it;
    }
    cur = next;
    if (it > 0 && std::abs(tr.objective[it] - tr.objective[it - 1]) <= cfg.early_stop_tol) {
      tr.early_stop_iteration = it;
      tr.termination = "early_stop";
      break;
    }
  }
  if (!best) throw Infeasible("planner found no feasible iterate");
  out.design = *best;
  tr.final_report = dp_report(out.design, channel, cfg);
  return out;
}

}  // namespace otafl
