#include "mpf/metrics.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "mpf/calibration.hpp"
#include "mpf/csv.hpp"

namespace mpf {

namespace {

struct Accumulator {
  double abs_err = 0.0;
  std::size_t below = 0;
  std::size_t above = 0;
  std::size_t m = 0;
};

void check_inputs(const ForecastFrame& truth, const Matrix& mask,
                  const ForecastFrame& median_fit, const ForecastFrame* lower_fit,
                  const ForecastFrame* upper_fit) {
  require_aligned(truth, median_fit);
  if ((lower_fit == nullptr) != (upper_fit == nullptr)) {
    throw Error(ErrorCode::InvalidArgument, "interval needs both bounds");
  }
  if (lower_fit) {
    require_aligned(truth, *lower_fit);
    require_aligned(truth, *upper_fit);
  }
  if (mask.rows() != truth.values.rows() || mask.cols() != truth.values.cols()) {
    throw Error(ErrorCode::AlignmentError, "mask shape differs from truth");
  }
}

void add_cell(Accumulator& acc, const ForecastFrame& truth, const ForecastFrame& median,
              const ForecastFrame* lower, const ForecastFrame* upper, std::size_t r,
              std::size_t j) {
  const double y = truth.values(r, j);
  acc.abs_err += std::abs(y - median.values(r, j));
  if (lower) {
    acc.below += y < lower->values(r, j);
    acc.above += y > upper->values(r, j);
  }
  ++acc.m;
}

}  // namespace

std::vector<AheadMetrics> per_ahead_metrics(const ForecastFrame& truth,
                                            const Matrix& mask,
                                            const ForecastFrame& median_fit,
                                            const ForecastFrame* lower_fit,
                                            const ForecastFrame* upper_fit) {
  check_inputs(truth, mask, median_fit, lower_fit, upper_fit);
  std::vector<AheadMetrics> out;
  for (std::size_t j = 0; j < mask.cols(); ++j) {
    Accumulator acc;
    for (std::size_t r = 0; r < mask.rows(); ++r) {
      if (mask(r, j) != 0.0) add_cell(acc, truth, median_fit, lower_fit, upper_fit, r, j);
    }
    if (acc.m == 0) continue;
    const auto m = static_cast<double>(acc.m);
    out.push_back({truth.aheads[j], acc.abs_err / m, static_cast<double>(acc.below) / m,
                   static_cast<double>(acc.above) / m, acc.m});
  }
  return out;
}

MetricReport compute_metrics(const ForecastFrame& truth, const Matrix& mask,
                             const ForecastFrame& median_fit,
                             const ForecastFrame* lower_fit,
                             const ForecastFrame* upper_fit) {
  check_inputs(truth, mask, median_fit, lower_fit, upper_fit);
  Accumulator acc;
  for (std::size_t r = 0; r < mask.rows(); ++r)
    for (std::size_t j = 0; j < mask.cols(); ++j)
      if (mask(r, j) != 0.0) add_cell(acc, truth, median_fit, lower_fit, upper_fit, r, j);
  if (acc.m == 0) throw Error(ErrorCode::EmptyTestSet, "no observed test cells");

  MetricReport report;
  const auto m = static_cast<double>(acc.m);
  report.mae = acc.abs_err / m;
  report.lmr = static_cast<double>(acc.below) / m;
  report.umr = static_cast<double>(acc.above) / m;
  report.m = acc.m;
  report.has_interval = lower_fit != nullptr;
  report.per_ahead = per_ahead_metrics(truth, mask, median_fit, lower_fit, upper_fit);
  return report;
}

double masked_mae(const DesignSet& design, const Matrix& fitted) {
  if (fitted.rows() != design.y.rows() || fitted.cols() != design.y.cols()) {
    throw Error(ErrorCode::AlignmentError, "fitted values do not match responses");
  }
  double total = 0.0;
  std::size_t m = 0;
  for (std::size_t r = 0; r < design.y.rows(); ++r) {
    for (std::size_t j = 0; j < design.y.cols(); ++j) {
      if (design.w(r, j) == 0.0) continue;
      total += std::abs(design.y(r, j) - fitted(r, j));
      ++m;
    }
  }
  if (m == 0) throw Error(ErrorCode::EmptyTestSet, "no observed test cells");
  return total / static_cast<double>(m);
}

ForecastFrame truth_frame(const DesignSet& design) {
  return {design.row_index, design.aheads, design.y, std::nullopt};
}

void write_metrics_csv(std::ostream& out, const MetricReport& report) {
  auto rates = [&](double lmr, double umr) {
    return report.has_interval ? format_double(lmr) + "," + format_double(umr) : std::string(",");
  };
  out << "scope,ahead,mae,lmr,umr,m\n";
  out << "overall,," << format_double(report.mae) << ',' << rates(report.lmr, report.umr) << ','
      << report.m << '\n';
  for (const auto& a : report.per_ahead) {
    out << "ahead," << a.ahead << ',' << format_double(a.mae) << ',' << rates(a.lmr, a.umr) << ','
        << a.m << '\n';
  }
}

}  // namespace mpf
