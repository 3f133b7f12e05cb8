// mpf: command-line front end for fitting, calibrating and evaluating
// multi-period forecasters.
//
// Exit codes: 0 success, 2 usage, 3 numerical or fit failure, 4 data or
// schema mismatch.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mpf/artifact.hpp"
#include "mpf/calibration.hpp"
#include "mpf/csv.hpp"
#include "mpf/cv.hpp"
#include "mpf/metrics.hpp"
#include "mpf/quantile.hpp"
#include "mpf/simulate.hpp"

namespace fs = std::filesystem;
using namespace mpf;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitData = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log(const std::string& msg) { std::cerr << "mpf: " << msg << '\n'; }

struct Options {
  std::string train, data, config, model_kind = "baseline", model_path, forecasts;
  std::string out, quantiles, df_grid = "1,2,3,4,5,6", as_of, scheme = "by_location";
  std::string snr = "1";
  std::size_t df = 0, cal_weeks = 4, folds = 5;
  std::size_t n = 1000, p = 10, q = 30, true_df = 3;
  double level = 0.8, missing_frac = 0.1, ridge_jitter = 0.0;
  std::uint64_t seed = 0;
  bool clamp_zero = false;
};

double parse_number(const std::string& text, const char* what) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw UsageError(std::string("bad ") + what + " '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<QuantileLevel> parse_quantiles(const std::string& text) {
  std::vector<QuantileLevel> out;
  for (const auto& item : split_list(text)) {
    const double tau = parse_number(item, "quantile");
    if (!(tau > 0 && tau < 1)) throw UsageError("quantiles must lie in (0, 1)");
    out.emplace_back(tau);
  }
  if (out.empty()) throw UsageError("empty --quantiles list");
  if (!std::is_sorted(out.begin(), out.end()) ||
      std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw UsageError("--quantiles must be strictly increasing");
  }
  return out;
}

std::vector<std::size_t> parse_df_grid(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    const double v = parse_number(item, "degrees of freedom");
    if (v < 1 || v != std::floor(v)) throw UsageError("--df-grid entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("empty --df-grid");
  return out;
}

ModelKind model_kind(const Options& o) {
  try {
    return parse_model_kind(o.model_kind);
  } catch (const Error&) {
    throw UsageError("--model must be baseline or smooth");
  }
}

void apply_as_of(const Options& o, TaskSpec& task) {
  if (!o.as_of.empty()) task.as_of = parse_time(o.as_of);
}

BasisMatrix basis_with_df(const TaskSpec& task, std::size_t df) {
  if (df < 1 || df > task.q()) {
    throw UsageError("--df must lie in [1, " + std::to_string(task.q()) + "]");
  }
  BasisSpec spec;
  spec.degrees_of_freedom = df;
  spec.aheads.assign(task.aheads.begin(), task.aheads.end());
  return build_basis(spec);
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  fn(out);
}

// Per-ahead SSE (baseline) or the total (smooth) over observed cells.
std::vector<double> sse_values(const DesignSet& d, const Matrix& fitted, bool per_ahead) {
  std::vector<double> sse(d.y.cols(), 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.y.cols(); ++j) {
      if (d.w(i, j) == 0.0) continue;
      const double e = d.y(i, j) - fitted(i, j);
      sse[j] += e * e;
    }
  if (per_ahead) return sse;
  double total = 0;
  for (double v : sse) total += v;
  return {total};
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

void fill_metadata(FitMetadata& md, const DesignSet& d, bool iso, double ridge) {
  md.rows = d.rows();
  md.observed_cells = d.observed_cells();
  if (d.rows() > 0) {
    md.first_forecast_time = d.row_index.front().forecast_time;
    md.last_forecast_time = d.row_index.back().forecast_time;
  }
  md.ridge_jitter = ridge;
  md.iso_dates = iso;
}

struct QuantileFit {
  QuantileCoefficientSet set;
  std::vector<double> objectives;
};

QuantileFit fit_quantile_model(const DesignSet& design, const std::vector<QuantileLevel>& levels,
                               ModelKind kind, const std::optional<BasisMatrix>& basis,
                               double ridge) {
  const DesignSet train = ridge > 0 ? augment_ridge(design, ridge) : design;
  QuantileFit out{fit_quantiles(train, levels, kind, basis), {}};
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto fitted = predict(out.set.fits[l], design.x, design.row_index);
    out.objectives.push_back(masked_pinball(design, fitted.values, levels[l]));
  }
  return out;
}

CoefficientSet fit_point_model(const DesignSet& design, ModelKind kind,
                               const std::optional<BasisMatrix>& basis, double ridge) {
  const DesignSet train = ridge > 0 ? augment_ridge(design, ridge) : design;
  if (kind == ModelKind::Baseline) return fit_baseline(train);
  return train.complete() ? fit_smooth(train, *basis) : fit_smooth_weighted(train, *basis);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Options& o) {
  SimConfig cfg;
  cfg.n_locations = o.n;
  cfg.p_predictors = o.p;
  cfg.q_aheads = o.q;
  cfg.true_df = o.true_df;
  cfg.missing_frac = o.missing_frac;
  cfg.seed = o.seed;
  if (o.snr == "noiseless") {
    cfg.noiseless = true;
  } else {
    cfg.snr = parse_number(o.snr, "--snr");
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (o.out.empty()) throw UsageError("simulate needs --out <directory>");

  const auto sim = simulate(cfg);
  const fs::path dir(o.out);
  fs::create_directories(dir);

  with_output((dir / "panel.csv").string(),
              [&](std::ostream& out) { write_panel(out, simulation_panel(sim)); });

  with_output((dir / "truth.csv").string(), [&](std::ostream& out) {
    out << "geo_id,forecast_time,ahead,signal,response,observed\n";
    for (std::size_t i = 0; i < sim.design.rows(); ++i) {
      const auto& key = sim.design.row_index[i];
      for (std::size_t j = 0; j < sim.design.aheads.size(); ++j) {
        out << quote_if_needed(key.location) << ',' << key.forecast_time << ','
            << sim.design.aheads[j] << ',' << format_double(sim.signal(i, j)) << ','
            << format_double(sim.response(i, j)) << ','
            << (sim.design.w(i, j) == 1.0 ? 1 : 0) << '\n';
      }
    }
  });

  CoefficientSet truth;
  truth.kind = ModelKind::Smooth;
  truth.theta = sim.theta;
  truth.basis = sim.basis;
  truth.column_index = sim.design.column_index;
  truth.aheads = sim.design.aheads;
  auto artifact = ModelArtifact::from_point(simulation_task(cfg), truth);
  fill_metadata(artifact.metadata, sim.design, false, 0.0);
  save_artifact(dir / "truth_model.json", artifact);

  log("simulated " + std::to_string(sim.design.rows()) + " locations, " +
      std::to_string(sim.design.observed_cells()) + " observed of " +
      std::to_string(sim.design.rows() * sim.design.aheads.size()) +
      " response cells, sigma " + format_double(sim.sigma));
  return 0;
}

int cmd_fit(const Options& o) {
  if (o.train.empty() || o.config.empty()) throw UsageError("fit needs --train and --config");
  const ModelKind kind = model_kind(o);
  TaskSpec task = load_task_config(o.config);
  apply_as_of(o, task);
  std::optional<BasisMatrix> basis;
  if (kind == ModelKind::Smooth) basis = basis_with_df(task, o.df);
  if (o.ridge_jitter < 0) throw UsageError("--ridge-jitter must be non-negative");

  const auto panel = load_panel(o.train);
  const auto design = build_design(panel, task);
  log("design: " + std::to_string(design.rows()) + " rows, " +
      std::to_string(design.x.cols()) + " features, " +
      std::to_string(design.observed_cells()) + " observed response cells");

  ModelArtifact artifact;
  if (!o.quantiles.empty()) {
    const auto levels = parse_quantiles(o.quantiles);
    auto fit = fit_quantile_model(design, levels, kind, basis, o.ridge_jitter);
    artifact = ModelArtifact::from_quantiles(task, fit.set);
    artifact.metadata.objective = "pinball";
    artifact.metadata.objective_values = fit.objectives;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      log("training pinball loss at tau " + format_double(levels[l].value()) + ": " +
          format_double(fit.objectives[l]));
    }
  } else {
    const auto coef = fit_point_model(design, kind, basis, o.ridge_jitter);
    artifact = ModelArtifact::from_point(task, coef);
    const auto fitted = predict(coef, design.x, design.row_index);
    artifact.metadata.objective = "sse";
    artifact.metadata.objective_values =
        sse_values(design, fitted.values, kind == ModelKind::Baseline);
    if (kind == ModelKind::Baseline) {
      for (std::size_t j = 0; j < task.q(); ++j) {
        log("training SSE at ahead " + std::to_string(task.aheads[j]) + ": " +
            format_double(artifact.metadata.objective_values[j]));
      }
    }
    log("training SSE: " + format_double(sum(artifact.metadata.objective_values)));
  }
  fill_metadata(artifact.metadata, design, panel.iso_dates, o.ridge_jitter);
  if (o.out.empty()) {
    write_artifact(std::cout, artifact);
  } else {
    save_artifact(o.out, artifact);
  }
  return 0;
}

struct Forecasts {
  ForecastFrame point;                  // median or point forecast
  std::optional<double> point_level;    // quantile level of `point`
  std::vector<double> levels;
  std::vector<ForecastFrame> by_level;  // one per level
  std::optional<CalibratedInterval> interval;
};

Forecasts forecast(const ModelArtifact& a, const DesignSet& d) {
  Forecasts f;
  if (!a.is_quantile()) {
    f.point = predict(a.point_coefficients(), d.x, d.row_index);
    return f;
  }
  f.levels = a.quantile_levels;
  for (std::size_t l = 0; l < f.levels.size(); ++l) {
    f.by_level.push_back(predict(a.quantile_coefficients(l), d.x, d.row_index));
    f.by_level.back().quantile = f.levels[l];
  }
  std::size_t mid = 0;
  for (std::size_t l = 1; l < f.levels.size(); ++l) {
    if (std::abs(f.levels[l] - 0.5) < std::abs(f.levels[mid] - 0.5)) mid = l;
  }
  f.point = f.by_level[mid];
  f.point_level = f.levels[mid];
  if (f.levels.size() >= 2) {
    CalibrationMargins margins = a.margins.value_or(CalibrationMargins{});
    margins.lower_tau = QuantileLevel(f.levels.front());
    margins.upper_tau = QuantileLevel(f.levels.back());
    f.interval = apply_margins(f.by_level.front(), f.by_level.back(), margins);
  }
  return f;
}

void clamp_zero(Forecasts& f) {
  auto clamp = [](ForecastFrame& frame) {
    for (std::size_t i = 0; i < frame.values.rows(); ++i)
      for (auto& v : frame.values.row(i)) v = std::max(v, 0.0);
  };
  clamp(f.point);
  for (auto& frame : f.by_level) clamp(frame);
  if (f.interval) {
    clamp(f.interval->lower);
    clamp(f.interval->upper);
  }
}

void write_forecasts(std::ostream& out, const Forecasts& f, bool iso) {
  out << "geo_id,forecast_time,ahead,quantile,value,lower,upper\n";
  const auto& rows = f.point.row_index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < f.point.aheads.size(); ++j) {
      std::string bounds = ",";
      if (f.interval) {
        bounds = format_double(f.interval->lower.values(i, j)) + ',' +
                 format_double(f.interval->upper.values(i, j));
      }
      const std::string prefix = quote_if_needed(rows[i].location) + ',' +
                                 format_time(rows[i].forecast_time, iso) + ',' +
                                 std::to_string(f.point.aheads[j]) + ',';
      if (f.by_level.empty()) {
        out << prefix << ',' << format_double(f.point.values(i, j)) << ',' << bounds << '\n';
        continue;
      }
      for (std::size_t l = 0; l < f.levels.size(); ++l) {
        out << prefix << format_double(f.levels[l]) << ','
            << format_double(f.by_level[l].values(i, j)) << ',' << bounds << '\n';
      }
    }
  }
}

TaskSpec task_for_model(const Options& o, const ModelArtifact& a, bool keep_times) {
  TaskSpec task = o.config.empty() ? a.task : load_task_config(o.config);
  if (o.config.empty() && !keep_times) task.forecast_times.clear();
  apply_as_of(o, task);
  if (task.response != a.task.response || task.predictors != a.task.predictors ||
      task.aheads != a.task.aheads) {
    throw Error(ErrorCode::SchemaError, "task configuration does not match the model");
  }
  return task;
}

const std::string& data_path(const Options& o) {
  if (!o.data.empty()) return o.data;
  if (!o.train.empty()) return o.train;
  throw UsageError("--data is required");
}

int cmd_predict(const Options& o) {
  if (o.model_path.empty()) throw UsageError("predict needs --model <artifact>");
  const auto artifact = load_artifact(o.model_path);
  const TaskSpec task = task_for_model(o, artifact, false);
  const auto panel = load_panel(data_path(o));
  const auto design = build_design(panel, task, {.retain_empty = true});
  auto f = forecast(artifact, design);
  if (o.clamp_zero) clamp_zero(f);
  with_output(o.out, [&](std::ostream& out) { write_forecasts(out, f, panel.iso_dates); });
  log("wrote forecasts for " + std::to_string(design.rows()) + " rows");
  return 0;
}

int cmd_calibrate(const Options& o) {
  if (o.model_path.empty()) throw UsageError("calibrate needs --model <artifact>");
  if (!(o.level > 0 && o.level < 1)) throw UsageError("--level must lie in (0, 1)");
  if (o.cal_weeks < 1) throw UsageError("--cal-weeks must be positive");
  const auto artifact = load_artifact(o.model_path);
  if (artifact.quantile_levels.size() < 2) {
    throw UsageError("calibration needs a model with at least two quantile levels");
  }
  const TaskSpec task = task_for_model(o, artifact, true);
  const auto panel = load_panel(data_path(o));
  const auto design = build_design(panel, task);

  TimeIndex last = design.row_index.front().forecast_time;
  for (const auto& key : design.row_index) last = std::max(last, key.forecast_time);
  const TimeIndex cutoff = last - 7 * static_cast<TimeIndex>(o.cal_weeks);
  const auto [fit_part, cal_part] = split_by_time(design, cutoff);
  if (fit_part.rows() == 0 || cal_part.observed_cells() == 0) {
    throw Error(ErrorCode::EmptyCalibrationSet, "calibration split leaves an empty part");
  }
  log("refitting on forecast times up to " + format_time(cutoff, panel.iso_dates) +
      ", calibrating on " + std::to_string(cal_part.rows()) + " rows");

  std::vector<QuantileLevel> levels;
  for (double tau : artifact.quantile_levels) levels.emplace_back(tau);
  std::optional<BasisMatrix> basis;
  if (artifact.kind == ModelKind::Smooth) basis = build_basis(*artifact.basis);
  const double ridge = artifact.metadata.ridge_jitter;
  auto refit = fit_quantile_model(fit_part, levels, artifact.kind, basis, ridge);

  ModelArtifact out = ModelArtifact::from_quantiles(task, refit.set);
  const auto lower = predict(refit.set.fits.front(), cal_part.x, cal_part.row_index);
  const auto upper = predict(refit.set.fits.back(), cal_part.x, cal_part.row_index);
  const auto errors = interval_errors(truth_frame(cal_part), cal_part.w, lower, upper);
  out.margins = compute_margins(errors.lower, errors.upper, o.level, levels.front(),
                                levels.back());
  out.metadata.objective = "pinball";
  out.metadata.objective_values = refit.objectives;
  fill_metadata(out.metadata, fit_part, panel.iso_dates, ridge);
  log("margins from " + std::to_string(errors.lower.size()) + " cells: lower " +
      format_double(out.margins->q_lower) + ", upper " + format_double(out.margins->q_upper));
  if (o.out.empty()) {
    write_artifact(std::cout, out);
  } else {
    save_artifact(o.out, out);
  }
  return 0;
}

// Reads a forecasts CSV into frames aligned with `design`.
Forecasts read_forecasts(const std::string& path, const DesignSet& design) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "geo_id,forecast_time,ahead,quantile,value,lower,upper") {
    throw Error(ErrorCode::SchemaError, "unexpected forecasts header");
  }
  struct Cell {
    std::optional<double> point, lower, upper;
  };
  std::map<std::tuple<std::string, TimeIndex, int>, Cell> cells;
  std::set<std::string> levels_seen;
  std::size_t line_no = 1;
  auto num = [&](const std::string& s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::ParseError, "bad number '" + s + "'", line_no);
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (!fields || fields->size() != 7) {
      throw Error(ErrorCode::ParseError, "expected 7 fields", line_no);
    }
    const auto& f = *fields;
    auto& cell = cells[{f[0], parse_time(f[1]), static_cast<int>(num(f[2]))}];
    levels_seen.insert(f[3]);
    if (f[3].empty() || num(f[3]) == 0.5) cell.point = num(f[4]);
    if (!f[5].empty()) cell.lower = num(f[5]);
    if (!f[6].empty()) cell.upper = num(f[6]);
  }

  Forecasts out;
  out.point = truth_frame(design);
  CalibratedInterval interval{out.point, out.point, 0};
  bool have_interval = true;
  for (std::size_t i = 0; i < design.rows(); ++i) {
    for (std::size_t j = 0; j < design.aheads.size(); ++j) {
      const auto& key = design.row_index[i];
      const auto it = cells.find({key.location, key.forecast_time, design.aheads[j]});
      if (it == cells.end() || !it->second.point) {
        if (design.w(i, j) == 0.0) continue;
        throw Error(ErrorCode::AlignmentError,
                    "no median forecast for " + key.location + " at " +
                        std::to_string(key.forecast_time) + " ahead " +
                        std::to_string(design.aheads[j]));
      }
      out.point.values(i, j) = *it->second.point;
      if (it->second.lower && it->second.upper) {
        interval.lower.values(i, j) = *it->second.lower;
        interval.upper.values(i, j) = *it->second.upper;
      } else {
        have_interval = false;
      }
    }
  }
  if (have_interval) out.interval = interval;
  return out;
}

int cmd_evaluate(const Options& o) {
  if (o.model_path.empty() && o.config.empty()) {
    throw UsageError("evaluate needs --model or --config for the task");
  }
  std::optional<ModelArtifact> artifact;
  if (!o.model_path.empty()) artifact = load_artifact(o.model_path);
  TaskSpec task = artifact ? task_for_model(o, *artifact, false) : load_task_config(o.config);
  if (!artifact) apply_as_of(o, task);
  const auto panel = load_panel(data_path(o));
  const auto design = build_design(panel, task, {.retain_empty = true});

  Forecasts f;
  if (!o.forecasts.empty()) {
    f = read_forecasts(o.forecasts, design);
  } else if (artifact) {
    f = forecast(*artifact, design);
    if (o.clamp_zero) clamp_zero(f);
  } else {
    throw UsageError("evaluate needs --forecasts or --model");
  }
  const auto truth = truth_frame(design);
  const auto report =
      f.interval ? compute_metrics(truth, design.w, f.point, &f.interval->lower, &f.interval->upper)
                 : compute_metrics(truth, design.w, f.point);
  with_output(o.out, [&](std::ostream& out) { write_metrics_csv(out, report); });
  log("MAE " + format_double(report.mae) + " over " + std::to_string(report.m) + " cells");
  return 0;
}

int cmd_cv(const Options& o) {
  if (o.train.empty() || o.config.empty()) throw UsageError("cv needs --train and --config");
  if (o.folds < 2) throw UsageError("--folds must be at least 2");
  FoldScheme scheme;
  try {
    scheme = parse_fold_scheme(o.scheme);
  } catch (const Error&) {
    throw UsageError("--scheme must be by_location or by_time");
  }
  TaskSpec task = load_task_config(o.config);
  apply_as_of(o, task);
  const auto grid = parse_df_grid(o.df_grid);
  for (std::size_t df : grid) {
    if (df > task.q()) throw UsageError("--df-grid entries must not exceed the number of aheads");
  }
  const auto design = build_design(load_panel(o.train), task);
  const auto result = cv_select_df(design, grid, o.folds, scheme, o.seed);
  with_output(o.out, [&](std::ostream& out) {
    out << "df,fold,mae\n";
    for (const auto& row : result.table) {
      for (std::size_t f = 0; f < row.fold_mae.size(); ++f) {
        out << row.df << ',' << f << ',' << format_double(row.fold_mae[f]) << '\n';
      }
      out << row.df << ",mean," << format_double(row.mean_mae) << '\n';
    }
  });
  log("best degrees of freedom: " + std::to_string(result.best_df));
  return 0;
}

int exit_code_for(ErrorCode code) {
  if (code == ErrorCode::InvalidArgument) return kExitUsage;
  if (is_numerical(code)) return kExitNumerical;
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-period forecasting with smooth coefficient curves"};
  app.require_subcommand(1);
  Options o;

  auto data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--train", o.train, "training panel CSV");
    cmd->add_option("--data", o.data, "panel CSV");
    cmd->add_option("--config", o.config, "task configuration JSON");
    cmd->add_option("--as-of", o.as_of, "only use data issued on or before this date");
    cmd->add_option("--out", o.out, "output path (stdout when omitted)");
  };

  auto* sim = app.add_subcommand("simulate", "write a synthetic panel and its ground truth");
  sim->add_option("--n", o.n, "number of locations")->check(CLI::PositiveNumber);
  sim->add_option("--p", o.p, "number of predictors")->check(CLI::PositiveNumber);
  sim->add_option("--q", o.q, "number of aheads")->check(CLI::PositiveNumber);
  sim->add_option("--true-df", o.true_df, "degrees of freedom of the true model")
      ->check(CLI::PositiveNumber);
  sim->add_option("--snr", o.snr, "signal-to-noise ratio, or 'noiseless'");
  sim->add_option("--missing-frac", o.missing_frac, "fraction of masked response cells")
      ->check(CLI::Range(0.0, 1.0));
  sim->add_option("--seed", o.seed, "generator seed");
  sim->add_option("--out", o.out, "output directory")->required();

  auto* fit = app.add_subcommand("fit", "fit a model and write its artifact");
  data_flags(fit);
  fit->add_option("--model", o.model_kind, "baseline or smooth");
  fit->add_option("--df", o.df, "degrees of freedom for the smooth model");
  fit->add_option("--quantiles", o.quantiles, "comma-separated quantile levels");
  fit->add_option("--ridge-jitter", o.ridge_jitter, "ridge penalty added to the fit");

  auto* pred = app.add_subcommand("predict", "write forecasts from a model artifact");
  data_flags(pred);
  pred->add_option("--model", o.model_path, "model artifact")->required();
  pred->add_flag("--clamp-zero", o.clamp_zero, "floor forecasts at zero");

  auto* cal = app.add_subcommand("calibrate", "refit on early times and calibrate intervals");
  data_flags(cal);
  cal->add_option("--model", o.model_path, "quantile model artifact")->required();
  cal->add_option("--cal-weeks", o.cal_weeks, "weeks of most recent forecast times held out");
  cal->add_option("--level", o.level, "empirical quantile order of the margins");

  auto* eval = app.add_subcommand("evaluate", "MAE and miscoverage rates");
  data_flags(eval);
  eval->add_option("--model", o.model_path, "model artifact");
  eval->add_option("--forecasts", o.forecasts, "forecasts CSV written by predict");
  eval->add_flag("--clamp-zero", o.clamp_zero, "floor forecasts at zero");

  auto* cv = app.add_subcommand("cv", "choose degrees of freedom by cross-validation");
  data_flags(cv);
  cv->add_option("--df-grid", o.df_grid, "comma-separated degrees of freedom");
  cv->add_option("--folds", o.folds, "number of folds");
  cv->add_option("--scheme", o.scheme, "by_location or by_time");
  cv->add_option("--seed", o.seed, "fold assignment seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      if (o.missing_frac >= 1.0) throw UsageError("--missing-frac must be below 1");
      return cmd_simulate(o);
    }
    if (fit->parsed()) return cmd_fit(o);
    if (pred->parsed()) return cmd_predict(o);
    if (cal->parsed()) return cmd_calibrate(o);
    if (eval->parsed()) return cmd_evaluate(o);
    if (cv->parsed()) return cmd_cv(o);
  } catch (const UsageError& e) {
    std::cerr << "mpf: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "mpf: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "mpf: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
