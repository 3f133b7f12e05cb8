#include "mpf/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mpf {

QuantileLevel::QuantileLevel(double tau) : tau_(tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "quantile level must lie in (0, 1), got " + std::to_string(tau));
  }
}

double pinball(double y, double yhat, QuantileLevel tau) noexcept {
  const double t = tau.value();
  return y >= yhat ? t * (y - yhat) : (1.0 - t) * (yhat - y);
}

double weighted_pinball_objective(const Matrix& x, std::span<const double> y,
                                  std::span<const double> w,
                                  std::span<const double> theta, QuantileLevel tau) {
  if (y.size() != x.rows() || w.size() != x.rows() || theta.size() != x.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "pinball objective inputs disagree in size");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (w[i] == 0.0) continue;
    auto row = x.row(i);
    const double fit = std::inner_product(row.begin(), row.end(), theta.begin(), 0.0);
    total += w[i] * pinball(y[i], fit, tau);
  }
  return total;
}

double masked_pinball(const DesignSet& design, const Matrix& fitted, QuantileLevel tau) {
  if (fitted.rows() != design.y.rows() || fitted.cols() != design.y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "fitted values do not match responses");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < design.y.rows(); ++r)
    for (std::size_t j = 0; j < design.y.cols(); ++j)
      if (design.w(r, j) != 0.0) total += pinball(design.y(r, j), fitted(r, j), tau);
  return total;
}

namespace {

using Eigen::VectorXd;

double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

struct Direction {
  VectorXd dx, dy, dz, dw;
};

double check_objective(const Eigen::MatrixXd& a, const VectorXd& b,
                       const VectorXd& theta, double tau) {
  const VectorXd r = b - a * theta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    total += r[i] >= 0.0 ? tau * r[i] : (tau - 1.0) * r[i];
  }
  return total;
}

// Basic solution through the k rows with the smallest absolute residuals
// that are linearly independent.
std::optional<VectorXd> nearest_vertex(const Eigen::MatrixXd& a, const VectorXd& b,
                                       const VectorXd& theta) {
  const Eigen::Index n = a.rows();
  const Eigen::Index k = a.cols();
  const VectorXd r = b - a * theta;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(r[i]) < std::abs(r[j]);
  });

  Eigen::MatrixXd basis(k, k);  // orthonormal rows of the chosen span
  std::vector<Eigen::Index> chosen;
  for (Eigen::Index i : order) {
    VectorXd v = a.row(i).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < chosen.size(); ++c) {
        const auto e = basis.row(static_cast<Eigen::Index>(c)).transpose();
        v -= e.dot(v) * e;
      }
    }
    const double norm = v.norm();
    if (norm <= 1e-8 * norm0) continue;
    basis.row(static_cast<Eigen::Index>(chosen.size())) = (v / norm).transpose();
    chosen.push_back(i);
    if (static_cast<Eigen::Index>(chosen.size()) == k) break;
  }
  if (static_cast<Eigen::Index>(chosen.size()) < k) return std::nullopt;

  Eigen::MatrixXd sub(k, k);
  VectorXd rhs(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    sub.row(c) = a.row(chosen[static_cast<std::size_t>(c)]);
    rhs[c] = b[chosen[static_cast<std::size_t>(c)]];
  }
  VectorXd sol = sub.colPivHouseholderQr().solve(rhs);
  if (!sol.allFinite()) return std::nullopt;
  return sol;
}

}  // namespace

QrSolution solve_weighted_qr(const Matrix& x, std::span<const double> y,
                             std::span<const double> w, QuantileLevel tau_level,
                             const QrSolverOptions& options) {
  const std::size_t n_all = x.rows();
  const std::size_t k = x.cols();
  if (y.size() != n_all || w.size() != n_all) {
    throw Error(ErrorCode::ShapeMismatch, "response/weights length differs from rows");
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n_all; ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::InvalidArgument, "weights must be finite and non-negative");
    }
    if (w[i] > 0.0) kept.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(kept.size());
  const auto kk = static_cast<Eigen::Index>(k);
  if (k == 0 || kept.size() < k) {
    throw Error(ErrorCode::RankDeficient,
                std::to_string(kept.size()) + " weighted rows for " +
                    std::to_string(k) + " coefficients");
  }

  Eigen::MatrixXd a(n, kk);
  VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t src = kept[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < kk; ++j) a(i, j) = w[src] * x(src, static_cast<std::size_t>(j));
    b[i] = w[src] * y[src];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  {
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    if (!(diag.maxCoeff() > 0.0) || diag.minCoeff() <= kRankTolerance * diag.maxCoeff()) {
      throw Error(ErrorCode::RankDeficient, "weighted design is rank deficient");
    }
  }

  const double tau = tau_level.value();
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  const VectorXd c = -b / scale;

  // Primal x in [0, 1] with slack s = 1 - x; dual multipliers y_d, z, w_d.
  VectorXd xp = VectorXd::Constant(n, 1.0 - tau);
  VectorXd sp = VectorXd::Constant(n, tau);
  const VectorXd rhs_b = a.transpose() * xp;
  VectorXd yd = qr.solve(c);
  VectorXd r = c - a * yd;
  const double shift = std::max(0.1 * r.cwiseAbs().mean(), 1e-3);
  VectorXd zd = r.cwiseMax(0.0).array() + shift;
  VectorXd wd = (-r).cwiseMax(0.0).array() + shift;

  const double step_scale = 0.99995;
  int iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations; ++iter) {
    const double gap = xp.dot(zd) + sp.dot(wd);
    const double dual_obj = rhs_b.dot(yd) - wd.sum();
    const VectorXd rp = rhs_b - a.transpose() * xp;
    const VectorXd rd = c - a * yd - zd + wd;
    if (gap <= options.gap_tolerance * (1.0 + std::abs(dual_obj)) &&
        rp.norm() <= 1e-9 * (1.0 + rhs_b.norm()) &&
        rd.norm() <= 1e-9 * (1.0 + c.norm())) {
      converged = true;
      break;
    }

    const VectorXd qdiag =
        (zd.cwiseQuotient(xp) + wd.cwiseQuotient(sp)).cwiseInverse();
    const Eigen::MatrixXd normal = a.transpose() * qdiag.asDiagonal() * a;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
      throw Error(ErrorCode::NonConvergence, "normal matrix factorization failed");
    }

    auto solve_direction = [&](const VectorXd& rxz, const VectorXd& rsw) {
      Direction dir;
      const VectorXd rho = rd - rxz.cwiseQuotient(xp) + rsw.cwiseQuotient(sp);
      dir.dy = ldlt.solve(rp + a.transpose() * qdiag.cwiseProduct(rho));
      dir.dx = qdiag.cwiseProduct(a * dir.dy - rho);
      dir.dz = (rxz - zd.cwiseProduct(dir.dx)).cwiseQuotient(xp);
      dir.dw = (rsw + wd.cwiseProduct(dir.dx)).cwiseQuotient(sp);
      return dir;
    };
    auto step_lengths = [&](const Direction& dir) {
      const double ap = std::min({1.0, step_scale * max_step(xp, dir.dx),
                                  step_scale * max_step(sp, -dir.dx)});
      const double ad = std::min({1.0, step_scale * max_step(zd, dir.dz),
                                  step_scale * max_step(wd, dir.dw)});
      return std::pair{ap, ad};
    };

    // Predictor.
    const VectorXd rxz_aff = -xp.cwiseProduct(zd);
    const VectorXd rsw_aff = -sp.cwiseProduct(wd);
    const Direction aff = solve_direction(rxz_aff, rsw_aff);
    const auto [ap_aff, ad_aff] = step_lengths(aff);
    const double gap_aff =
        (xp + ap_aff * aff.dx).dot(zd + ad_aff * aff.dz) +
        (sp - ap_aff * aff.dx).dot(wd + ad_aff * aff.dw);
    const double sigma = std::pow(gap_aff / gap, 3.0);
    const double mu = gap / (2.0 * static_cast<double>(n));

    // Corrector.
    const VectorXd rxz = (rxz_aff - aff.dx.cwiseProduct(aff.dz)).array() + sigma * mu;
    const VectorXd rsw = (rsw_aff + aff.dx.cwiseProduct(aff.dw)).array() + sigma * mu;
    const Direction dir = solve_direction(rxz, rsw);
    const auto [ap, ad] = step_lengths(dir);

    xp += ap * dir.dx;
    sp -= ap * dir.dx;
    yd += ad * dir.dy;
    zd += ad * dir.dz;
    wd += ad * dir.dw;
    if (!xp.allFinite() || !yd.allFinite()) {
      throw Error(ErrorCode::NonConvergence, "interior-point iterates diverged");
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NonConvergence,
                "duality gap above tolerance after " +
                    std::to_string(options.max_iterations) + " iterations");
  }

  VectorXd theta = -yd * scale;
  double objective = check_objective(a, b, theta, tau);
  bool vertex = false;
  if (auto v = nearest_vertex(a, b, theta)) {
    const double vobj = check_objective(a, b, *v, tau);
    if (vobj <= objective * (1.0 + 1e-9) + 1e-300) {
      theta = *v;
      objective = vobj;
      vertex = true;
    }
  }

  QrSolution out;
  out.theta.assign(theta.data(), theta.data() + theta.size());
  out.objective = objective;
  out.iterations = iter;
  out.vertex = vertex;
  return out;
}

CoefficientSet fit_baseline_q(const DesignSet& design, QuantileLevel tau,
                              const QrSolverOptions& options) {
  const std::size_t m = design.x.cols();
  const std::size_t q = design.y.cols();
  Matrix b(q, m);
  for (std::size_t j = 0; j < q; ++j) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < design.rows(); ++r)
      if (design.w(r, j) != 0.0) rows.push_back(r);
    if (rows.size() < m) {
      throw Error(ErrorCode::InsufficientRows,
                  "ahead " + std::to_string(design.aheads[j]) + " has " +
                      std::to_string(rows.size()) + " observed rows for " +
                      std::to_string(m) + " coefficients",
                  j);
    }
    const Matrix xs = design.x.select_rows(rows);
    std::vector<double> ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = design.y(rows[i], j);
    const std::vector<double> ones(rows.size(), 1.0);
    QrSolution sol;
    try {
      sol = solve_weighted_qr(xs, ys, ones, tau, options);
    } catch (const Error& e) {
      throw Error(e.code(),
                  "ahead " + std::to_string(design.aheads[j]) + ": " + e.what(), j);
    }
    for (std::size_t k = 0; k < m; ++k) b(j, k) = sol.theta[k];
  }
  CoefficientSet out;
  out.kind = ModelKind::Baseline;
  out.b = std::move(b);
  out.column_index = design.column_index;
  out.aheads = design.aheads;
  return out;
}

CoefficientSet fit_smooth_q(const DesignSet& design, const BasisMatrix& basis,
                            QuantileLevel tau, const QrSolverOptions& options) {
  check_compatible(design, basis);
  const std::size_t m = design.x.cols();
  const std::size_t d = basis.d();
  if (design.observed_cells() < d * m) {
    throw Error(ErrorCode::InsufficientRows,
                std::to_string(design.observed_cells()) + " observed cells for " +
                    std::to_string(d * m) + " coefficients");
  }
  const ExpandedSystem sys = expand_observed(design, basis);
  const std::vector<double> ones(sys.y.size(), 1.0);
  const QrSolution sol = solve_weighted_qr(sys.x, sys.y, ones, tau, options);

  CoefficientSet out;
  out.kind = ModelKind::Smooth;
  out.theta = theta_from_vec(sol.theta, d, m);
  out.basis = basis;
  out.column_index = design.column_index;
  out.aheads = design.aheads;
  return out;
}

QuantileCoefficientSet fit_quantiles(const DesignSet& design,
                                     std::span<const QuantileLevel> levels,
                                     ModelKind kind,
                                     const std::optional<BasisMatrix>& basis,
                                     const QrSolverOptions& options) {
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "no quantile levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i - 1] < levels[i])) {
      throw Error(ErrorCode::InvalidArgument, "quantile levels must be increasing");
    }
  }
  if (kind == ModelKind::Smooth && !basis) {
    throw Error(ErrorCode::InvalidArgument, "smooth quantile fit needs a basis");
  }
  QuantileCoefficientSet out;
  out.levels.assign(levels.begin(), levels.end());
  for (const auto& tau : levels) {
    out.fits.push_back(kind == ModelKind::Baseline
                           ? fit_baseline_q(design, tau, options)
                           : fit_smooth_q(design, *basis, tau, options));
  }
  return out;
}

}  // namespace mpf
