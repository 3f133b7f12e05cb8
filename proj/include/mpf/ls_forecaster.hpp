#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mpf/basis.hpp"
#include "mpf/linalg.hpp"
#include "mpf/panel.hpp"

namespace mpf {

enum class ModelKind { Baseline, Smooth };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

/// Fitted coefficients: either a full q x m matrix B (baseline) or a d x m
/// matrix Theta with its basis, inducing B = H * Theta (smooth).
struct CoefficientSet {
  ModelKind kind = ModelKind::Baseline;
  std::optional<Matrix> b;
  std::optional<Matrix> theta;
  std::optional<BasisMatrix> basis;
  std::vector<ColumnKey> column_index;
  std::vector<int> aheads;

  std::size_t m() const noexcept { return column_index.size(); }
  std::size_t q() const noexcept { return aheads.size(); }
  /// The q x m per-ahead coefficient matrix.
  Matrix coefficients() const;
};

/// Point or quantile forecasts, r rows by q aheads.
struct ForecastFrame {
  std::vector<RowKey> row_index;
  std::vector<int> aheads;
  Matrix values;
  std::optional<double> quantile;
};

/// Per-ahead least squares over the observed rows of each response column.
/// Throws InsufficientRows / RankDeficient tagged with the ahead index.
CoefficientSet fit_baseline(const DesignSet& design);

/// Complete-response smooth fit: Theta^T = argmin ||Y H - X Theta^T||_F.
/// Throws IncompleteResponses if any response cell is unobserved.
CoefficientSet fit_smooth(const DesignSet& design, const BasisMatrix& basis);

/// Observed-cell rows of the expanded system H (x) X and the matching
/// responses, in column-stacked cell order (ahead-major).
struct ExpandedSystem {
  Matrix x;  // (#observed cells) x (d*m)
  std::vector<double> y;
};

ExpandedSystem expand_observed(const DesignSet& design, const BasisMatrix& basis);

/// Reshapes theta = vec(Theta^T) (length d*m) into the d x m matrix Theta.
Matrix theta_from_vec(std::span<const double> theta, std::size_t d, std::size_t m);

/// Smooth fit with a binary mask: least squares on the observed rows of the
/// expanded system.
CoefficientSet fit_smooth_weighted(const DesignSet& design, const BasisMatrix& basis);

/// Forecasts X_new * B^T; smooth models evaluate (X_new * Theta^T) * H^T.
ForecastFrame predict(const CoefficientSet& coef, const Matrix& x_new,
                      std::vector<RowKey> row_index);

/// Sum of squared errors over observed cells.
double masked_sse(const DesignSet& design, const Matrix& fitted);

/// Appends m rows sqrt(lambda) * e_k with zero, fully observed responses,
/// which turns any of the fits above into a ridge-penalized fit.
DesignSet augment_ridge(const DesignSet& design, double lambda);

void check_compatible(const DesignSet& design, const BasisMatrix& basis);

}  // namespace mpf
