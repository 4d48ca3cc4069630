#include "otafl/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace otafl {

namespace {

double max_step(const Vec& v, const Vec& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  return a;
}

struct StandardForm {
  Mat a;
  Vec b, c;
};

struct IpmResult {
  Vec x, y;
  int iterations = 0;
};

// min c^T x s.t. A x = b, x >= 0 (A full row rank).
IpmResult mehrotra(const StandardForm& sf, double tol, int max_iters) {
  const Mat& a = sf.a;
  const Eigen::Index n = a.cols();
  const Mat aat = a * a.transpose();
  Eigen::LLT<Mat> aat_f(aat);
  Vec x = a.transpose() * aat_f.solve(sf.b);
  Vec y = aat_f.solve(a * sf.c);
  Vec z = sf.c - a.transpose() * y;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  z.array() += std::max(-1.5 * z.minCoeff(), 0.0);
  {
    const double xz = x.dot(z);
    const double dx = 0.5 * xz / std::max(z.sum(), 1e-300);
    const double dz = 0.5 * xz / std::max(x.sum(), 1e-300);
    x.array() += dx;
    z.array() += dz;
    if (!(x.minCoeff() > 0.0)) x.array() += 1.0;
    if (!(z.minCoeff() > 0.0)) z.array() += 1.0;
  }
  const double b_norm = sf.b.norm();
  const double c_norm = sf.c.norm();
  for (int it = 0; it < max_iters; ++it) {
    const Vec rb = a * x - sf.b;
    const Vec rc = a.transpose() * y + z - sf.c;
    const double pobj = sf.c.dot(x);
    const double dobj = sf.b.dot(y);
    const double mu = x.dot(z) / static_cast<double>(n);
    if (rb.norm() <= tol * (1.0 + b_norm) && rc.norm() <= tol * (1.0 + c_norm) &&
        std::abs(pobj - dobj) <= tol * (1.0 + std::abs(pobj)))
      return {x, y, it};

    const Vec d = (x.array() / z.array()).matrix();
    Mat normal = a * d.asDiagonal() * a.transpose();
    Eigen::LLT<Mat> nf(normal);
    if (nf.info() != Eigen::Success) {
      normal.diagonal().array() += 1e-14 * std::max(1.0, normal.diagonal().maxCoeff());
      nf.compute(normal);
      if (nf.info() != Eigen::Success) throw NumericalFailure("LP: normal equations lost definiteness");
    }

    auto direction = [&](const Vec& r_xz, Vec& dx, Vec& dy, Vec& dz) {
      const Vec zinv_r = (r_xz.array() / z.array()).matrix();
      dy = nf.solve(-rb - a * (zinv_r + (d.array() * rc.array()).matrix()));
      dz = -rc - a.transpose() * dy;
      dx = zinv_r - (d.array() * dz.array()).matrix();
    };
    Vec dxa, dya, dza;
    direction(-(x.array() * z.array()).matrix(), dxa, dya, dza);
    const double apa = std::min(1.0, max_step(x, dxa));
    const double ada = std::min(1.0, max_step(z, dza));
    const double mu_aff = (x + apa * dxa).dot(z + ada * dza) / static_cast<double>(n);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    Vec dx, dy, dz;
    direction((-(x.array() * z.array()) + sigma * mu - dxa.array() * dza.array()).matrix(), dx, dy, dz);
    const double ap = std::min(1.0, 0.99 * max_step(x, dx));
    const double ad = std::min(1.0, 0.99 * max_step(z, dz));
    x += ap * dx;
    y += ad * dy;
    z += ad * dz;
  }
  throw NumericalFailure("LP: interior point did not converge in " + std::to_string(max_iters) + " iterations");
}

}  // namespace

LpSolution solve_lp(const LpProblem& p, double tol) {
  const Eigen::Index m = p.costs.size();
  if (p.constraint_matrix.rows() != m || p.constraint_matrix.cols() != m || p.rhs.size() != m ||
      p.box_upper.size() != m)
    throw ConfigError("LP: dimension mismatch");
  if ((p.constraint_matrix.array() < 0.0).any() || (p.costs.array() < 0.0).any())
    throw ConfigError("LP: costs and constraint matrix must be nonnegative");

  const double u_scale = std::max(1.0, p.box_upper.cwiseAbs().maxCoeff());
  Vec u = p.box_upper;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (u(i) < -tol * u_scale) throw Infeasible("LP: negative box bound for variable " + std::to_string(i));
    u(i) = std::max(u(i), 0.0);
  }
  const Vec reach = p.constraint_matrix * u;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double scale = std::max({1.0, std::abs(p.rhs(i)), reach(i)});
    if (reach(i) < p.rhs(i) - tol * scale) throw Infeasible("LP: row " + std::to_string(i) + " unreachable");
  }

  LpSolution sol;
  sol.x = Vec::Zero(m);
  sol.row_duals = Vec::Zero(m);
  if ((p.rhs.array() <= 0.0).all()) return sol;

  // Rows with r_i <= 0 hold for every x >= 0 (A >= 0); they get zero duals.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (p.rhs(i) > 0.0) rows.push_back(i);
  const auto nr = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Index> free_vars;
  for (Eigen::Index i = 0; i < m; ++i)
    if (u(i) > 1e-14 * u_scale) free_vars.push_back(i);
  const auto nf = static_cast<Eigen::Index>(free_vars.size());

  // Row scaling keeps every row of the lift of order one.
  Vec row_scale(nr);
  for (Eigen::Index j = 0; j < nr; ++j) {
    double s = p.rhs(rows[j]);
    for (Eigen::Index k : free_vars) s = std::max(s, p.constraint_matrix(rows[j], k));
    row_scale(j) = s;
  }
  const double c_scale = std::max(p.costs.maxCoeff(), 1e-300);

  StandardForm sf;
  const Eigen::Index cols = 2 * nf + nr;
  sf.a = Mat::Zero(nr + nf, cols);
  sf.b = Vec::Zero(nr + nf);
  sf.c = Vec::Zero(cols);
  for (Eigen::Index j = 0; j < nr; ++j) {
    for (Eigen::Index k = 0; k < nf; ++k) sf.a(j, k) = p.constraint_matrix(rows[j], free_vars[k]) / row_scale(j);
    sf.a(j, nf + j) = -1.0;
    sf.b(j) = p.rhs(rows[j]) / row_scale(j);
  }
  for (Eigen::Index k = 0; k < nf; ++k) {
    sf.a(nr + k, k) = 1.0;
    sf.a(nr + k, nf + nr + k) = 1.0;
    sf.b(nr + k) = u(free_vars[k]);
    sf.c(k) = p.costs(free_vars[k]) / c_scale;
  }

  const IpmResult r = mehrotra(sf, tol, 200);
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index i = free_vars[k];
    sol.x(i) = std::clamp(r.x(k), 0.0, u(i));
  }
  for (Eigen::Index j = 0; j < nr; ++j) sol.row_duals(rows[j]) = std::max(0.0, r.y(j)) * c_scale / row_scale(j);
  sol.objective = p.costs.dot(sol.x);
  sol.dual_objective = c_scale * sf.b.dot(r.y);
  sol.iterations = r.iterations;
  return sol;
}

}  // namespace otafl
