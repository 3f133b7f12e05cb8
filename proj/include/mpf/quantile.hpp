#pragma once

#include <span>
#include <vector>

#include "mpf/basis.hpp"
#include "mpf/ls_forecaster.hpp"

namespace mpf {

/// Quantile level tau, strictly inside (0, 1).
class QuantileLevel {
public:
  explicit QuantileLevel(double tau);
  double value() const noexcept { return tau_; }
  friend auto operator<=>(const QuantileLevel&, const QuantileLevel&) = default;

private:
  double tau_;
};

/// Check loss: tau * (y - yhat) when y >= yhat, (1 - tau) * (yhat - y) otherwise.
double pinball(double y, double yhat, QuantileLevel tau) noexcept;

/// sum_i w_i * pinball(y_i, x_i . theta).
double weighted_pinball_objective(const Matrix& x, std::span<const double> y,
                                  std::span<const double> w,
                                  std::span<const double> theta, QuantileLevel tau);

/// Pinball loss summed over the observed cells of a design.
double masked_pinball(const DesignSet& design, const Matrix& fitted, QuantileLevel tau);

struct QrSolverOptions {
  double gap_tolerance = 1e-8;  // relative duality gap
  int max_iterations = 200;
};

struct QrSolution {
  std::vector<double> theta;
  double objective = 0.0;
  int iterations = 0;
  bool vertex = false;  // theta interpolates k observations exactly
};

/// Weighted quantile regression.
///
/// Zero-weight rows are dropped and the remaining rows scaled by their weight
/// (the check loss is positively homogeneous). The bounded dual LP
///
///   max y'a  s.t.  X'a = (1 - tau) X'1,  0 <= a <= 1
///
/// is solved by a primal-dual interior-point method with Mehrotra's
/// predictor-corrector; theta is the negated equality multiplier. The
/// interior solution is then rounded to the basic solution through the k
/// observations with the smallest residuals, which is kept when its
/// objective is no worse.
///
/// Throws RankDeficient when the weighted rows do not span R^k and
/// NonConvergence when the iteration cap is reached.
QrSolution solve_weighted_qr(const Matrix& x, std::span<const double> y,
                             std::span<const double> w, QuantileLevel tau,
                             const QrSolverOptions& options = {});

/// Quantile regression separately for each ahead over its observed rows.
CoefficientSet fit_baseline_q(const DesignSet& design, QuantileLevel tau,
                              const QrSolverOptions& options = {});

/// Smooth quantile fit on the observed rows of H (x) X.
CoefficientSet fit_smooth_q(const DesignSet& design, const BasisMatrix& basis,
                            QuantileLevel tau, const QrSolverOptions& options = {});

struct QuantileCoefficientSet {
  std::vector<QuantileLevel> levels;  // strictly increasing
  std::vector<CoefficientSet> fits;   // one per level
};

/// Fits every level with the same model kind (basis required for smooth).
QuantileCoefficientSet fit_quantiles(const DesignSet& design,
                                     std::span<const QuantileLevel> levels,
                                     ModelKind kind,
                                     const std::optional<BasisMatrix>& basis,
                                     const QrSolverOptions& options = {});

}  // namespace mpf
