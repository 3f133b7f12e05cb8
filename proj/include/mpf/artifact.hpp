#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpf/basis.hpp"
#include "mpf/calibration.hpp"
#include "mpf/ls_forecaster.hpp"
#include "mpf/panel.hpp"
#include "mpf/quantile.hpp"

namespace mpf {

inline constexpr int kArtifactFormatVersion = 1;

struct FitMetadata {
  std::size_t rows = 0;
  std::size_t observed_cells = 0;
  std::optional<TimeIndex> first_forecast_time;
  std::optional<TimeIndex> last_forecast_time;
  std::string objective;                 // "sse" or "pinball"
  std::vector<double> objective_values;  // per ahead (baseline) or total (smooth)
  double ridge_jitter = 0.0;
  bool iso_dates = false;

  friend bool operator==(const FitMetadata&, const FitMetadata&) = default;
};

/// Serialized model: the task, model kind, basis spec and either one point
/// coefficient payload or one payload per quantile level, plus optional
/// calibration margins. Stored as a versioned JSON document.
struct ModelArtifact {
  int format_version = kArtifactFormatVersion;
  TaskSpec task;
  ModelKind kind = ModelKind::Baseline;
  std::optional<BasisSpec> basis;
  std::optional<Matrix> point;  // B (q x m) or Theta (d x m)
  std::vector<double> quantile_levels;
  std::vector<Matrix> quantile_payloads;
  std::optional<CalibrationMargins> margins;
  FitMetadata metadata;

  bool is_quantile() const noexcept { return !quantile_levels.empty(); }

  /// Coefficient set for the point payload.
  CoefficientSet point_coefficients() const;
  /// Coefficient set for quantile payload `i`.
  CoefficientSet quantile_coefficients(std::size_t i) const;

  static ModelArtifact from_point(const TaskSpec& task, const CoefficientSet& coef);
  static ModelArtifact from_quantiles(const TaskSpec& task,
                                      const QuantileCoefficientSet& coefs);
};

/// Throws SchemaError on malformed content, wrong version or inconsistent
/// dimensions.
ModelArtifact read_artifact(std::istream& in);
ModelArtifact load_artifact(const std::filesystem::path& path);
void write_artifact(std::ostream& out, const ModelArtifact& artifact);
void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact);

/// Task configuration document:
///   {"response": "...", "predictors": [{"variable": "...", "lags": [...]}],
///    "aheads": [...], "forecast_times": [...], "as_of": ...}
/// Times are day indices or ISO date strings. A model artifact is accepted
/// as well and its embedded task is returned.
TaskSpec read_task_config(std::istream& in);
TaskSpec load_task_config(const std::filesystem::path& path);
void write_task_config(std::ostream& out, const TaskSpec& task);

}  // namespace mpf
