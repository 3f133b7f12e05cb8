#include "mpf/ls_forecaster.hpp"

#include <cmath>
#include <string>

namespace mpf {

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Baseline ? "baseline" : "smooth";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "baseline") return ModelKind::Baseline;
  if (name == "smooth") return ModelKind::Smooth;
  throw Error(ErrorCode::SchemaError, "unknown model kind '" + std::string(name) + "'");
}

Matrix CoefficientSet::coefficients() const {
  if (kind == ModelKind::Baseline) return *b;
  return basis->h * *theta;
}

void check_compatible(const DesignSet& design, const BasisMatrix& basis) {
  if (basis.q() != design.aheads.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "basis has " + std::to_string(basis.q()) + " aheads, design has " +
                    std::to_string(design.aheads.size()));
  }
  for (std::size_t j = 0; j < basis.q(); ++j) {
    if (basis.spec.aheads[j] != static_cast<double>(design.aheads[j])) {
      throw Error(ErrorCode::ShapeMismatch, "basis aheads differ from design aheads");
    }
  }
}

CoefficientSet fit_baseline(const DesignSet& design) {
  const std::size_t m = design.x.cols();
  const std::size_t q = design.y.cols();
  Matrix b(q, m);
  for (std::size_t j = 0; j < q; ++j) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < design.rows(); ++r) {
      if (design.w(r, j) != 0.0) rows.push_back(r);
    }
    if (rows.size() < m) {
      throw Error(ErrorCode::InsufficientRows,
                  "ahead " + std::to_string(design.aheads[j]) + " has " +
                      std::to_string(rows.size()) + " observed rows for " +
                      std::to_string(m) + " coefficients",
                  j);
    }
    const Matrix xs = design.x.select_rows(rows);
    Matrix ys(rows.size(), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) ys(i, 0) = design.y(rows[i], j);
    Matrix c;
    try {
      c = solve_least_squares(xs, ys);
    } catch (const Error& e) {
      throw Error(e.code(),
                  "ahead " + std::to_string(design.aheads[j]) + ": " + e.what(), j);
    }
    for (std::size_t k = 0; k < m; ++k) b(j, k) = c(k, 0);
  }
  CoefficientSet out;
  out.kind = ModelKind::Baseline;
  out.b = std::move(b);
  out.column_index = design.column_index;
  out.aheads = design.aheads;
  return out;
}

CoefficientSet fit_smooth(const DesignSet& design, const BasisMatrix& basis) {
  check_compatible(design, basis);
  if (!design.complete()) {
    throw Error(ErrorCode::IncompleteResponses,
                std::to_string(design.y.size() - design.observed_cells()) +
                    " response cells unobserved; use the weighted fit");
  }
  const Matrix theta_t = solve_least_squares(design.x, design.y * basis.h);
  CoefficientSet out;
  out.kind = ModelKind::Smooth;
  out.theta = theta_t.transpose();
  out.basis = basis;
  out.column_index = design.column_index;
  out.aheads = design.aheads;
  return out;
}

ExpandedSystem expand_observed(const DesignSet& design, const BasisMatrix& basis) {
  check_compatible(design, basis);
  const std::size_t n = design.rows();
  const std::size_t m = design.x.cols();
  const std::size_t d = basis.d();
  const std::size_t cells = design.observed_cells();

  ExpandedSystem sys{Matrix(cells, d * m), {}};
  sys.y.reserve(cells);
  std::size_t row = 0;
  for (std::size_t j = 0; j < design.aheads.size(); ++j) {
    for (std::size_t r = 0; r < n; ++r) {
      if (design.w(r, j) == 0.0) continue;
      auto dst = sys.x.row(row);
      auto src = design.x.row(r);
      for (std::size_t l = 0; l < d; ++l) {
        const double h = basis.h(j, l);
        for (std::size_t k = 0; k < m; ++k) dst[l * m + k] = h * src[k];
      }
      sys.y.push_back(design.y(r, j));
      ++row;
    }
  }
  return sys;
}

Matrix theta_from_vec(std::span<const double> theta, std::size_t d, std::size_t m) {
  if (theta.size() != d * m) {
    throw Error(ErrorCode::ShapeMismatch, "theta vector has wrong length");
  }
  Matrix out(d, m);
  for (std::size_t l = 0; l < d; ++l)
    for (std::size_t k = 0; k < m; ++k) out(l, k) = theta[l * m + k];
  return out;
}

CoefficientSet fit_smooth_weighted(const DesignSet& design, const BasisMatrix& basis) {
  check_compatible(design, basis);
  const std::size_t m = design.x.cols();
  const std::size_t d = basis.d();
  const std::size_t cells = design.observed_cells();
  if (cells < d * m) {
    throw Error(ErrorCode::InsufficientRows,
                std::to_string(cells) + " observed cells for " +
                    std::to_string(d * m) + " coefficients");
  }
  ExpandedSystem sys = expand_observed(design, basis);
  const Matrix sol = solve_least_squares(sys.x, Matrix::column(sys.y));

  CoefficientSet out;
  out.kind = ModelKind::Smooth;
  out.theta = theta_from_vec(sol.values(), d, m);
  out.basis = basis;
  out.column_index = design.column_index;
  out.aheads = design.aheads;
  return out;
}

ForecastFrame predict(const CoefficientSet& coef, const Matrix& x_new,
                      std::vector<RowKey> row_index) {
  if (x_new.cols() != coef.m()) {
    throw Error(ErrorCode::ShapeMismatch,
                "features have " + std::to_string(x_new.cols()) +
                    " columns, model expects " + std::to_string(coef.m()));
  }
  if (row_index.size() != x_new.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "row index length differs from feature rows");
  }
  ForecastFrame frame;
  frame.row_index = std::move(row_index);
  frame.aheads = coef.aheads;
  if (coef.kind == ModelKind::Baseline) {
    frame.values = x_new * coef.b->transpose();
  } else {
    frame.values = (x_new * coef.theta->transpose()) * coef.basis->h.transpose();
  }
  return frame;
}

double masked_sse(const DesignSet& design, const Matrix& fitted) {
  if (fitted.rows() != design.y.rows() || fitted.cols() != design.y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "fitted values do not match responses");
  }
  double sse = 0.0;
  for (std::size_t r = 0; r < design.y.rows(); ++r) {
    for (std::size_t j = 0; j < design.y.cols(); ++j) {
      if (design.w(r, j) == 0.0) continue;
      const double e = design.y(r, j) - fitted(r, j);
      sse += e * e;
    }
  }
  return sse;
}

DesignSet augment_ridge(const DesignSet& design, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "ridge jitter must be non-negative");
  }
  const std::size_t n = design.rows();
  const std::size_t m = design.x.cols();
  const std::size_t q = design.y.cols();
  DesignSet out;
  out.x = Matrix(n + m, m);
  out.y = Matrix(n + m, q);
  out.w = Matrix(n + m, q, 1.0);
  out.x.view().topRows(static_cast<Eigen::Index>(n)) = design.x.view();
  out.y.view().topRows(static_cast<Eigen::Index>(n)) = design.y.view();
  out.w.view().topRows(static_cast<Eigen::Index>(n)) = design.w.view();
  const double s = std::sqrt(lambda);
  for (std::size_t k = 0; k < m; ++k) out.x(n + k, k) = s;
  out.row_index = design.row_index;
  for (std::size_t k = 0; k < m; ++k) out.row_index.push_back({"__ridge__", 0});
  out.column_index = design.column_index;
  out.aheads = design.aheads;
  return out;
}

}  // namespace mpf
