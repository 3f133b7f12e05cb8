#include "mpf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpf {

void require_aligned(const ForecastFrame& a, const ForecastFrame& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
    throw Error(ErrorCode::AlignmentError, "forecast frames differ in shape");
  }
  if (a.aheads != b.aheads) {
    throw Error(ErrorCode::AlignmentError, "forecast frames differ in aheads");
  }
  if (a.row_index != b.row_index) {
    throw Error(ErrorCode::AlignmentError,
                "forecast frames differ in (location, forecast time) rows");
  }
}

IntervalErrors interval_errors(const ForecastFrame& truth, const Matrix& mask,
                               const ForecastFrame& lower_fit,
                               const ForecastFrame& upper_fit) {
  require_aligned(truth, lower_fit);
  require_aligned(truth, upper_fit);
  if (mask.rows() != truth.values.rows() || mask.cols() != truth.values.cols()) {
    throw Error(ErrorCode::AlignmentError, "mask shape differs from truth");
  }
  IntervalErrors out;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t j = 0; j < mask.cols(); ++j) {
      if (mask(r, j) == 0.0) continue;
      const double y = truth.values(r, j);
      out.lower.push_back(lower_fit.values(r, j) - y);
      out.upper.push_back(y - upper_fit.values(r, j));
    }
  }
  return out;
}

double conformal_quantile(std::vector<double> errors, double level) {
  if (errors.empty()) {
    throw Error(ErrorCode::EmptyCalibrationSet, "no calibration errors");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "calibration level must lie in (0, 1)");
  }
  const auto m = static_cast<double>(errors.size());
  // The small offset keeps products like 0.8 * 20 from rounding up a rank.
  double rank = std::ceil(level * (m + 1.0) - 1e-9);
  rank = std::clamp(rank, 1.0, m);
  const auto idx = static_cast<std::size_t>(rank) - 1;
  std::nth_element(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(idx),
                   errors.end());
  return errors[idx];
}

CalibrationMargins compute_margins(const std::vector<double>& e_lower,
                                   const std::vector<double>& e_upper, double level,
                                   QuantileLevel lower_tau, QuantileLevel upper_tau) {
  if (!(lower_tau < upper_tau)) {
    throw Error(ErrorCode::InvalidArgument, "lower quantile must be below upper");
  }
  CalibrationMargins out{lower_tau, upper_tau, 0.0, 0.0, level};
  out.q_lower = conformal_quantile(e_lower, level);
  out.q_upper = conformal_quantile(e_upper, level);
  return out;
}

CalibratedInterval apply_margins(const ForecastFrame& lower_fit,
                                 const ForecastFrame& upper_fit,
                                 const CalibrationMargins& margins) {
  require_aligned(lower_fit, upper_fit);
  CalibratedInterval out{lower_fit, upper_fit, 0};
  out.lower.values.view().array() -= margins.q_lower;
  out.upper.values.view().array() += margins.q_upper;
  for (std::size_t i = 0; i < out.lower.values.size(); ++i) {
    if (out.lower.values.values()[i] > out.upper.values.values()[i]) ++out.degenerate;
  }
  return out;
}

}  // namespace mpf
