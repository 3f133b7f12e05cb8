#pragma once

#include <vector>

#include "mpf/ls_forecaster.hpp"
#include "mpf/quantile.hpp"

namespace mpf {

/// Additive interval margins estimated on a calibration slice.
struct CalibrationMargins {
  QuantileLevel lower_tau{0.2};
  QuantileLevel upper_tau{0.8};
  double q_lower = 0.0;
  double q_upper = 0.0;
  double level = 0.8;
};

struct IntervalErrors {
  std::vector<double> lower;  // lower_fit - truth
  std::vector<double> upper;  // truth - upper_fit
};

/// Conformity scores over the observed cells (mask != 0), row-major order.
/// Throws AlignmentError unless all frames share rows, aheads and shape.
IntervalErrors interval_errors(const ForecastFrame& truth, const Matrix& mask,
                               const ForecastFrame& lower_fit,
                               const ForecastFrame& upper_fit);

/// Order statistic of rank ceil(level * (M + 1)), clamped to [1, M].
double conformal_quantile(std::vector<double> errors, double level);

/// Throws EmptyCalibrationSet when there are no errors.
CalibrationMargins compute_margins(const std::vector<double>& e_lower,
                                   const std::vector<double>& e_upper, double level,
                                   QuantileLevel lower_tau = QuantileLevel{0.2},
                                   QuantileLevel upper_tau = QuantileLevel{0.8});

struct CalibratedInterval {
  ForecastFrame lower;
  ForecastFrame upper;
  std::size_t degenerate = 0;  // cells where lower > upper after shifting
};

/// [lower - Q_lower, upper + Q_upper].
CalibratedInterval apply_margins(const ForecastFrame& lower_fit,
                                 const ForecastFrame& upper_fit,
                                 const CalibrationMargins& margins);

void require_aligned(const ForecastFrame& a, const ForecastFrame& b);

}  // namespace mpf
