#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "mpf/ls_forecaster.hpp"

namespace mpf {

struct AheadMetrics {
  int ahead = 0;
  double mae = 0.0;
  double lmr = 0.0;
  double umr = 0.0;
  std::size_t m = 0;
};

/// Averages over observed cells. Miscoverage uses strict inequalities:
/// truth < lower counts toward LMR, truth > upper toward UMR.
struct MetricReport {
  double mae = 0.0;
  double lmr = 0.0;
  double umr = 0.0;
  std::size_t m = 0;
  bool has_interval = true;
  std::vector<AheadMetrics> per_ahead;
};

/// Throws EmptyTestSet when the mask has no observed cell, AlignmentError on
/// mismatched frames. Pass no interval frames for point-only forecasts.
MetricReport compute_metrics(const ForecastFrame& truth, const Matrix& mask,
                             const ForecastFrame& median_fit,
                             const ForecastFrame* lower_fit = nullptr,
                             const ForecastFrame* upper_fit = nullptr);

/// Same metrics restricted to each ahead column; aheads with no observed
/// cell are left out.
std::vector<AheadMetrics> per_ahead_metrics(const ForecastFrame& truth,
                                            const Matrix& mask,
                                            const ForecastFrame& median_fit,
                                            const ForecastFrame* lower_fit = nullptr,
                                            const ForecastFrame* upper_fit = nullptr);

/// MAE over the observed cells of a design.
double masked_mae(const DesignSet& design, const Matrix& fitted);

/// Observed responses of a design as a frame.
ForecastFrame truth_frame(const DesignSet& design);

/// `scope,ahead,mae,lmr,umr,m`, the overall row first.
void write_metrics_csv(std::ostream& out, const MetricReport& report);

}  // namespace mpf
