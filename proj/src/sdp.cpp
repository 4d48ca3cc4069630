#include "otafl/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otafl {

namespace {

using HermEig = Eigen::SelfAdjointEigenSolver<CMat>;

CMat herm(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double real_inner(const CMat& a, const CMat& b) { return (a.array() * b.conjugate().array()).real().sum(); }

/// Largest alpha with X + alpha dX PSD (inf when dX keeps X PSD for all alpha).
double psd_step(const Eigen::LLT<CMat>& chol_x, const CMat& dx) {
  const CMat l_inv_dx = chol_x.matrixL().solve(dx);
  const CMat m = chol_x.matrixL().solve(l_inv_dx.adjoint());
  HermEig es(herm(m), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

double ratio_step(const Vec& v, const Vec& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  return a;
}

struct Direction {
  CMat dx, dz;
  Vec dy, ds;
};

// Interior-point solve on Hermitian c_herm. Fills F, tau, duals, objective, iterations, gap.
SdpSolution solve_core(const CMat& c_herm, const CMat& channels, const Vec& lower_bounds,
                       const SdpOptions& opts) {
  const int n = static_cast<int>(c_herm.rows());

  double hmax = 0.0;
  for (Eigen::Index i = 0; i < channels.cols(); ++i) hmax = std::max(hmax, channels.col(i).squaredNorm());

  // Active rows, normalized to unit channel vectors.
  std::vector<int> active;
  for (Eigen::Index i = 0; i < lower_bounds.size(); ++i) {
    if (!std::isfinite(lower_bounds(i))) throw Infeasible("trace SDP: infinite lower bound");
    if (lower_bounds(i) <= 0.0) continue;
    if (!(channels.col(i).squaredNorm() > 1e-24 * hmax) || hmax == 0.0)
      throw Infeasible("trace SDP: positive bound on a zero channel");
    active.push_back(static_cast<int>(i));
  }

  SdpSolution sol;
  sol.duals = Vec::Zero(lower_bounds.size());

  if (active.empty()) {
    HermEig es(c_herm);
    const CVec v = es.eigenvectors().col(0);
    sol.F = 1e-12 * v * v.adjoint();
    sol.tau = 1e-12;
    sol.objective = real_inner(c_herm, sol.F);
    return sol;
  }

  const int m = static_cast<int>(active.size());
  CMat hs(n, m);
  Vec bs(m), hnorm2(m);
  for (int k = 0; k < m; ++k) {
    const auto col = channels.col(active[static_cast<std::size_t>(k)]);
    hnorm2(k) = col.squaredNorm();
    hs.col(k) = col / std::sqrt(hnorm2(k));
    bs(k) = lower_bounds(active[static_cast<std::size_t>(k)]) / hnorm2(k);
  }
  const double bscale = bs.maxCoeff();
  bs /= bscale;
  const double cscale = std::max(c_herm.norm(), 1e-300);
  const CMat cs = c_herm / cscale;
  const double cs_norm = cs.norm();
  const double b_norm = bs.norm();

  CMat x = CMat::Identity(n, n);
  CMat z = CMat::Identity(n, n);
  Vec y = Vec::Ones(m);
  Vec s = Vec::Ones(m);
  const double nu = n + m;

  auto a_op = [&](const CMat& xx) {
    Vec out(m);
    for (int k = 0; k < m; ++k) out(k) = std::real(hs.col(k).dot(xx * hs.col(k)));
    return out;
  };
  auto at_op = [&](const Vec& yy) {
    CMat out = CMat::Zero(n, n);
    for (int k = 0; k < m; ++k) out.noalias() += yy(k) * hs.col(k) * hs.col(k).adjoint();
    return out;
  };

  double rp_rel = 0.0, rd_rel = 0.0, gap_rel = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iters; ++it) {
    const Vec rp = bs - a_op(x) + s;
    const CMat rd = cs - at_op(y) - z;
    const double pobj = real_inner(cs, x);
    const double dobj = bs.dot(y);
    const double mu = (real_inner(x, z) + s.dot(y)) / nu;
    rp_rel = rp.norm() / (1.0 + b_norm);
    rd_rel = rd.norm() / (1.0 + cs_norm);
    gap_rel = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu_rel = mu * nu / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (rp_rel <= opts.tol && rd_rel <= opts.tol && gap_rel <= opts.tol && mu_rel <= opts.tol) {
      converged = true;
      break;
    }

    Eigen::LLT<CMat> chol_x(x), chol_z(z);
    if (chol_x.info() != Eigen::Success || chol_z.info() != Eigen::Success) break;
    const CMat z_inv = chol_z.solve(CMat::Identity(n, n));
    const CMat g = hs.adjoint() * (x * hs);
    const CMat w = hs.adjoint() * (z_inv * hs);
    Mat schur(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) schur(i, j) = std::real(g(i, j) * std::conj(w(i, j)));
    schur.diagonal().array() += (s.array() / y.array()).matrix().array();
    Eigen::LDLT<Mat> schur_f(0.5 * (schur + schur.transpose()));
    const CMat x_rd_zinv = x * (rd * z_inv);

    auto solve_dir = [&](double target, const CMat& corr, const Vec& corr_sy) {
      const CMat base = target * z_inv - x - herm(corr * z_inv);
      const CMat kmat = base - herm(x_rd_zinv);
      const Vec comp = (Vec::Constant(m, target) - (s.array() * y.array()).matrix() - corr_sy);
      const Vec rhs = rp - a_op(kmat) + (comp.array() / y.array()).matrix();
      Direction d;
      d.dy = schur_f.solve(rhs);
      d.dz = rd - at_op(d.dy);
      d.dx = base - herm(x * (d.dz * z_inv));
      d.ds = ((comp.array() - s.array() * d.dy.array()) / y.array()).matrix();
      return d;
    };
    auto steps = [&](const Direction& d) {
      const double ap = std::min({1.0, psd_step(chol_x, d.dx), ratio_step(s, d.ds)});
      const double ad = std::min({1.0, psd_step(chol_z, d.dz), ratio_step(y, d.dy)});
      return std::pair<double, double>(ap, ad);
    };

    const CMat zero = CMat::Zero(n, n);
    const Direction pred = solve_dir(0.0, zero, Vec::Zero(m));
    const auto [ap_a, ad_a] = steps(pred);
    const double mu_aff = (real_inner(x + ap_a * pred.dx, z + ad_a * pred.dz) +
                           (s + ap_a * pred.ds).dot(y + ad_a * pred.dy)) / nu;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    const Direction corr = solve_dir(sigma * mu, pred.dx * pred.dz, (pred.ds.array() * pred.dy.array()).matrix());
    auto [ap, ad] = steps(corr);
    const double gamma = 0.98;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    x = herm(x + ap * corr.dx);
    s += ap * corr.ds;
    z = herm(z + ad * corr.dz);
    y += ad * corr.dy;
    if (ap < 1e-12 && ad < 1e-12) break;
  }
  if (!converged) {
    throw NumericalFailure("trace SDP: no convergence after " + std::to_string(it) +
                           " iterations (primal " + std::to_string(rp_rel) + ", dual " +
                           std::to_string(rd_rel) + ", gap " + std::to_string(gap_rel) + ")");
  }

  // Back to original units: F = bscale X, y_i = cscale y_i / |h_i|^2.
  sol.F = herm(bscale * x);
  sol.tau = std::max(std::real(sol.F.trace()), 1e-12);
  for (int k = 0; k < m; ++k)
    sol.duals(active[static_cast<std::size_t>(k)]) = cscale * y(k) / hnorm2(k);
  sol.objective = real_inner(c_herm, sol.F);
  sol.iterations = it;
  sol.gap = gap_rel;
  return sol;
}

}  // namespace

SdpSolution solve_trace_sdp(const CMat& cost, const CMat& channels, const Vec& lower_bounds,
                            const SdpOptions& opts) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || channels.rows() != n || channels.cols() != lower_bounds.size())
    throw ConfigError("trace SDP: dimension mismatch");
  const CMat c_herm = herm(cost);

  // When the cost does not couple span(active channels) to its complement and is PSD on the
  // complement, an optimal F lives in the span: solve there instead.
  SdpSolution sol;
  bool reduced = false;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < lower_bounds.size(); ++i)
    if (lower_bounds(i) > 0.0) active.push_back(i);
  if (!active.empty() && static_cast<int>(active.size()) < n) {
    CMat hs(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) hs.col(static_cast<Eigen::Index>(k)) = channels.col(active[k]);
    Eigen::ColPivHouseholderQR<CMat> qr(hs);
    qr.setThreshold(1e-12);
    const int r = static_cast<int>(qr.rank());
    if (r > 0 && r < n) {
      const CMat qfull = qr.householderQ() * CMat::Identity(n, n);
      const CMat q = qfull.leftCols(r);
      const CMat qp = qfull.rightCols(n - r);
      const double cn = std::max(c_herm.norm(), 1e-300);
      const double cross = (qp.adjoint() * c_herm * q).norm();
      HermEig ep(herm(qp.adjoint() * c_herm * qp), Eigen::EigenvaluesOnly);
      if (cross <= 1e-10 * cn && ep.eigenvalues()(0) >= -1e-12 * cn) {
        const CMat ch = q.adjoint() * channels;
        sol = solve_core(herm(q.adjoint() * c_herm * q), ch, lower_bounds, opts);
        sol.F = herm(q * sol.F * q.adjoint());
        sol.objective = real_inner(c_herm, sol.F);
        reduced = true;
      }
    }
  }
  if (!reduced) sol = solve_core(c_herm, channels, lower_bounds, opts);

  double viol = 0.0;
  for (Eigen::Index i = 0; i < lower_bounds.size(); ++i) {
    const double lhs = std::real(channels.col(i).dot(sol.F * channels.col(i)));
    viol = std::max(viol, (lower_bounds(i) - lhs) / std::max(1.0, std::abs(lower_bounds(i))));
  }
  sol.primal_residual = viol;
  CMat zfinal = c_herm;
  for (Eigen::Index i = 0; i < lower_bounds.size(); ++i)
    zfinal -= sol.duals(i) * channels.col(i) * channels.col(i).adjoint();
  HermEig ez(herm(zfinal), Eigen::EigenvaluesOnly);
  sol.dual_residual = std::max(0.0, -ez.eigenvalues()(0)) / (1.0 + c_herm.norm());
  return sol;
}

CMat SdpSubproblem::base_cost() const {
  const int n = dim();
  CMat c = CMat::Identity(n, n) * tau_weight;
  for (Eigen::Index m = 0; m < channels.cols(); ++m)
    c.noalias() += noise_weights(m) * channels.col(m) * channels.col(m).adjoint();
  return c;
}

CMat SdpSubproblem::cost() const {
  CMat c = base_cost();
  c.diagonal().array() += penalty;
  c.noalias() -= penalty * direction * direction.adjoint();
  return c;
}

SdpSolution solve_sdp_mm_step(const SdpSubproblem& p, const SdpOptions& opts) {
  return solve_trace_sdp(p.cost(), p.channels, p.lower_bounds, opts);
}

CVec principal_eigvec(const CMat& F) {
  const int n = static_cast<int>(F.rows());
  HermEig es(herm(F));
  const Vec& lam = es.eigenvalues();
  const double top = lam(n - 1);
  const double tie = 1e-10 * std::max(1.0, std::abs(top));
  int first = n - 1;
  while (first > 0 && lam(first - 1) >= top - tie) --first;
  CVec v;
  if (first == n - 1) {
    v = es.eigenvectors().col(n - 1);
  } else {
    const CMat basis = es.eigenvectors().rightCols(n - first);
    for (int k = 0; k < n; ++k) {
      v = basis * basis.row(k).adjoint();  // projection of e_k
      if (v.norm() > 1e-6) break;
    }
  }
  v.normalize();
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > best * (1.0 + 1e-12)) {
      best = std::abs(v(i));
      arg = i;
    }
  return v * (std::abs(v(arg)) / v(arg));
}

RankOneFactor rank_one_factor(const CMat& F, double tau, double max_ratio) {
  if (!(tau > 0.0)) throw ConfigError("rank_one_factor: tau must be positive");
  HermEig es(herm(F), Eigen::EigenvaluesOnly);
  const Vec& lam = es.eigenvalues();
  const Eigen::Index n = lam.size();
  const double l1 = lam(n - 1);
  if (!(l1 > 0.0)) throw RankTooHigh("rank_one_factor: F has no positive eigenvalue");
  RankOneFactor out;
  out.eigen_ratio = n > 1 ? std::max(0.0, lam(n - 2)) / l1 : 0.0;
  if (out.eigen_ratio > max_ratio)
    throw RankTooHigh("rank_one_factor: lambda2/lambda1 = " + std::to_string(out.eigen_ratio));
  out.f0 = principal_eigvec(F);
  out.eta = 1.0 / tau;
  return out;
}

DcSdpResult solve_dc_sdp(const SdpSubproblem& instance, int mm_iters, const CVec& init_direction,
                         const DcOptions& opts) {
  if (mm_iters < 1) throw ConfigError("solve_dc_sdp: need at least one MM iteration");
  SdpSubproblem p = instance;
  p.direction = init_direction.normalized();
  const CMat base = p.base_cost();
  DcSdpResult res;
  for (int j = 0; j < mm_iters; ++j) {
    const SdpSolution step = solve_sdp_mm_step(p, opts.sdp);
    HermEig es(herm(step.F), Eigen::EigenvaluesOnly);
    const double l1 = es.eigenvalues()(es.eigenvalues().size() - 1);
    const double tr = std::real(step.F.trace());
    const double value = real_inner(base, step.F) + p.penalty * (tr - l1);
    res.F = step.F;
    res.tau = step.tau;
    res.trace_gap = std::max(0.0, tr - l1);
    res.direction = principal_eigvec(step.F);
    res.iterations = j + 1;
    const bool rank_one = res.trace_gap <= opts.rank_tol * tr;
    const bool settled = !res.objective_history.empty() &&
                         std::abs(res.objective_history.back() - value) <= opts.objective_tol * std::abs(value);
    res.objective_history.push_back(value);
    if (settled && rank_one) break;
    if (settled) p.penalty *= opts.penalty_growth;
    p.direction = res.direction;
  }
  res.final_penalty = p.penalty;
  return res;
}

}  // namespace otafl
