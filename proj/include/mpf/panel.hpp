#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpf/linalg.hpp"

namespace mpf {

/// Days. ISO dates map to days since 1970-01-01.
using TimeIndex = std::int64_t;

TimeIndex parse_time(std::string_view text);
std::string format_time(TimeIndex t, bool iso);

struct Observation {
  std::string location;
  TimeIndex time = 0;
  std::string variable;
  double value = 0.0;
  std::optional<TimeIndex> issue;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Long-format panel, one record per (location, time, variable, issue).
struct PanelDataset {
  std::vector<Observation> records;
  bool iso_dates = false;  // times were written as ISO dates
  bool has_issue = false;  // the issue column was present
};

/// Header must be `geo_id,time_value,signal,value` optionally followed by
/// `,issue`. Throws ParseError (with the 1-based line number as index) or
/// DuplicateRecord.
PanelDataset read_panel(std::istream& in);
PanelDataset load_panel(const std::filesystem::path& path);
void write_panel(std::ostream& out, const PanelDataset& panel);

struct PredictorSpec {
  std::string variable;
  std::vector<int> lags;

  friend bool operator==(const PredictorSpec&, const PredictorSpec&) = default;
};

struct TaskSpec {
  std::string response;
  std::vector<PredictorSpec> predictors;
  std::vector<int> aheads;
  std::vector<TimeIndex> forecast_times;  // empty: every time in the panel
  std::optional<TimeIndex> as_of;

  std::size_t m() const noexcept;
  std::size_t q() const noexcept { return aheads.size(); }
  /// Throws InvalidArgument when lags/aheads are malformed or empty.
  void validate() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct RowKey {
  std::string location;
  TimeIndex forecast_time = 0;

  friend bool operator==(const RowKey&, const RowKey&) = default;
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

struct ColumnKey {
  std::string variable;
  int lag = 0;

  friend bool operator==(const ColumnKey&, const ColumnKey&) = default;
};

/// Lagged features, responses at every ahead and the observation mask.
/// Y entries with W = 0 are stored as zero.
struct DesignSet {
  Matrix x;
  Matrix y;
  Matrix w;
  std::vector<RowKey> row_index;
  std::vector<ColumnKey> column_index;
  std::vector<int> aheads;

  std::size_t rows() const noexcept { return row_index.size(); }
  std::size_t observed_cells() const noexcept;
  bool complete() const noexcept;
  DesignSet subset(std::span<const std::size_t> rows) const;
};

struct DesignOptions {
  /// Keep rows whose responses are all unobserved (needed for prediction).
  bool retain_empty = false;
};

/// One row per (forecast time, location), time-major, locations sorted.
/// A row exists iff every lagged predictor value is visible as of
/// `task.as_of`. When several issues exist for the same cell the latest
/// issue not after `as_of` wins; records without an issue become visible at
/// their own time.
///
/// Throws UnknownVariable or EmptyDesign.
DesignSet build_design(const PanelDataset& panel, const TaskSpec& task,
                       const DesignOptions& options = {});

/// Rows with forecast_time <= cutoff first, the rest second.
std::pair<DesignSet, DesignSet> split_by_time(const DesignSet& design,
                                              TimeIndex cutoff);

}  // namespace mpf
